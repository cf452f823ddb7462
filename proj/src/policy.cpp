#include "oscrl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oscrl {

namespace {

void check_feat_dim(const PolicyParams& params, std::span<const double> feat) {
  if (static_cast<int>(feat.size()) != params.weights.cols())
    throw std::invalid_argument("feature dimension mismatch: got " +
                                std::to_string(feat.size()) + ", expected " +
                                std::to_string(params.weights.cols()));
}

void check_temperature(double temperature) {
  if (!(temperature > 0.0))
    throw std::invalid_argument("temperature must be > 0");
}

// softmax(logits / temperature) computed in place
std::vector<double> softmax_of(std::vector<double> logits, double temperature) {
  for (double& v : logits) v /= temperature;
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : logits) v /= sum;
  return logits;
}

}  // namespace

PolicyParams initial_params(int k_max, double wait_bias) {
  PolicyParams p{Matrix(vocab::kSize, feature_dim(k_max))};
  p.weights(vocab::kWait, p.weights.cols() - 1) = wait_bias;
  return p;
}

std::vector<double> logits(const PolicyParams& params, std::span<const double> feat) {
  check_feat_dim(params, feat);
  const Matrix& w = params.weights;
  std::vector<double> out(static_cast<std::size_t>(w.rows()), 0.0);
  for (int r = 0; r < w.rows(); ++r) {
    double acc = 0.0;
    for (int c = 0; c < w.cols(); ++c) acc += w(r, c) * feat[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(r)] = acc;
  }
  return out;
}

std::vector<double> token_probs(const PolicyParams& params,
                                std::span<const double> feat, double temperature) {
  check_temperature(temperature);
  return softmax_of(logits(params, feat), temperature);
}

double logprob(const PolicyParams& params, std::span<const double> feat,
               Token token, double temperature) {
  check_temperature(temperature);
  auto z = logits(params, feat);
  for (double& v : z) v /= temperature;
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  return z[static_cast<std::size_t>(token)] - m - std::log(sum);
}

Token sample_token(const PolicyParams& params, std::span<const double> feat,
                   double temperature, Rng& rng) {
  const auto p = token_probs(params, feat, temperature);
  const double u = rng.uniform01();
  double cum = 0.0;
  for (int t = 0; t < vocab::kSize; ++t) {
    cum += p[static_cast<std::size_t>(t)];
    if (u < cum) return t;
  }
  return vocab::kSize - 1;  // u landed on accumulated rounding slack
}

double entropy(const PolicyParams& params, std::span<const double> feat,
               double temperature) {
  const auto p = token_probs(params, feat, temperature);
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

Matrix grad_logprob(const PolicyParams& params, std::span<const double> feat,
                    Token token) {
  const auto p = token_probs(params, feat, 1.0);
  Matrix g(params.weights.rows(), params.weights.cols());
  for (int r = 0; r < g.rows(); ++r) {
    const double delta = (r == token ? 1.0 : 0.0) - p[static_cast<std::size_t>(r)];
    for (int c = 0; c < g.cols(); ++c)
      g(r, c) = delta * feat[static_cast<std::size_t>(c)];
  }
  return g;
}

Response rollout(const PolicyParams& params, const Question& q, int cap,
                 double temperature, Rng& rng, int k_max) {
  if (cap < 1) throw std::invalid_argument("rollout: cap must be >= 1");
  Response resp;
  ScratchState state = initial_state(q);
  while (static_cast<int>(resp.tokens.size()) < cap) {
    const auto feat = features(state, k_max);
    const Token tok = sample_token(params, feat, temperature, rng);
    resp.tokens.push_back(tok);
    resp.logprobs.push_back(logprob(params, feat, tok, temperature));
    state = step_state(state, q, tok);
    if (tok == vocab::kEos) break;
  }
  resp.truncated = resp.tokens.back() != vocab::kEos;
  return resp;
}

std::vector<double> response_logprobs(const PolicyParams& params, const Question& q,
                                      std::span<const Token> tokens,
                                      double temperature, int k_max) {
  std::vector<double> out;
  out.reserve(tokens.size());
  ScratchState state = initial_state(q);
  for (Token tok : tokens) {
    const auto feat = features(state, k_max);
    out.push_back(logprob(params, feat, tok, temperature));
    state = step_state(state, q, tok);
  }
  return out;
}

double total_token_entropy(const PolicyParams& params, const Question& q,
                           std::span<const Token> tokens, double temperature,
                           int k_max) {
  double sum = 0.0;
  ScratchState state = initial_state(q);
  for (Token tok : tokens) {
    sum += entropy(params, features(state, k_max), temperature);
    state = step_state(state, q, tok);
  }
  return sum;
}

}  // namespace oscrl
