#include "oscrl/rl_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oscrl {

void ClipSpec::validate() const {
  if (!(eps_low > 0.0 && eps_low < 1.0))
    throw std::invalid_argument("clip.eps_low must be in (0, 1)");
  if (eps_high < eps_low)
    throw std::invalid_argument("clip.eps_high must be >= eps_low");
  if (kl_coef < 0.0) throw std::invalid_argument("clip.kl_coef must be >= 0");
}

LossNorm loss_norm_from_name(const std::string& name) {
  if (name == "response") return LossNorm::response;
  if (name == "token") return LossNorm::token;
  throw std::invalid_argument("unknown loss_norm: '" + name + "'");
}

std::string loss_norm_name(LossNorm norm) {
  return norm == LossNorm::response ? "response" : "token";
}

double capped_reward(const Question& q, const Response& resp, int cap) {
  if (cap < 1) throw std::invalid_argument("capped_reward: cap must be >= 1");
  const std::size_t n =
      std::min(resp.tokens.size(), static_cast<std::size_t>(cap));
  return static_cast<double>(
      verify(q, std::span<const Token>(resp.tokens.data(), n)));
}

std::vector<double> group_advantages(const std::vector<double>& rewards) {
  const std::size_t g = rewards.size();
  if (g < 2)
    throw std::invalid_argument("group_advantages: need at least 2 rewards");
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(g);
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(g);  // population variance
  const double std_dev = std::sqrt(var);
  std::vector<double> adv(g, 0.0);
  if (std_dev < 1e-8) return adv;  // degenerate group: no gradient signal
  for (std::size_t i = 0; i < g; ++i) adv[i] = (rewards[i] - mean) / std_dev;
  return adv;
}

LossStats surrogate_loss(const std::vector<Group>& batch, const PolicyParams& params,
                         const ClipSpec& clip, int k_max, LossNorm norm) {
  clip.validate();
  if (batch.empty()) throw std::invalid_argument("surrogate_loss: empty batch");

  const double lo = 1.0 - clip.eps_low;
  const double hi = 1.0 + clip.eps_high;

  LossStats stats;
  stats.grad = Matrix(params.weights.rows(), params.weights.cols());

  double objective = 0.0;
  long long total_tokens = 0;
  long long clipped_tokens = 0;

  for (const Group& group : batch) {
    const std::size_t g = group.responses.size();
    if (g == 0) throw std::invalid_argument("surrogate_loss: empty group");
    if (group.advantages.size() != g)
      throw std::invalid_argument("surrogate_loss: advantages/responses mismatch");

    long long group_tokens = 0;
    for (const Response& resp : group.responses)
      group_tokens += static_cast<long long>(resp.tokens.size());

    double group_objective = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
      const Response& resp = group.responses[i];
      const std::size_t len = resp.tokens.size();
      if (resp.logprobs.size() != len)
        throw std::invalid_argument(
            "surrogate_loss: old logprobs do not match token count");
      if (len == 0) throw std::invalid_argument("surrogate_loss: empty response");
      const double adv = group.advantages[i];
      const double weight = norm == LossNorm::response
                                ? 1.0 / static_cast<double>(len)
                                : 1.0 / static_cast<double>(group_tokens);
      // grad of the batch mean: -(1/batch)(1/G) * weight, applied per token
      const double grad_scale =
          -weight / (static_cast<double>(batch.size()) * static_cast<double>(g));

      ScratchState state = initial_state(group.question);
      for (std::size_t t = 0; t < len; ++t) {
        const Token tok = resp.tokens[t];
        const auto feat = features(state, k_max);
        const double new_lp = logprob(params, feat, tok, 1.0);
        const double old_lp = resp.logprobs[t];
        const double ratio = std::exp(new_lp - old_lp);

        const double unclipped = ratio * adv;
        const double clipped = std::clamp(ratio, lo, hi) * adv;
        const double term = std::min(unclipped, clipped);
        group_objective += weight * term;
        ++total_tokens;

        // Gradient of min(r*A, clip(r)*A): zero when the clipped branch is
        // selected and binding, A*r*dlogpi otherwise.
        double coef = 0.0;
        if (unclipped <= clipped) {
          coef = adv * ratio;
        } else {
          ++clipped_tokens;
        }
        if (clip.kl_coef > 0.0) {
          // k3 estimator against the rollout policy:
          // exp(old-new) - (old-new) - 1, gradient (1 - exp(old-new)) dlogpi
          coef -= clip.kl_coef * (1.0 - std::exp(old_lp - new_lp));
          group_objective -=
              weight * clip.kl_coef * (std::exp(old_lp - new_lp) - (old_lp - new_lp) - 1.0);
        }
        if (coef != 0.0) {
          const auto p = token_probs(params, feat, 1.0);
          for (int r = 0; r < stats.grad.rows(); ++r) {
            const double delta =
                ((r == tok ? 1.0 : 0.0) - p[static_cast<std::size_t>(r)]) *
                coef * grad_scale;
            if (delta == 0.0) continue;
            for (int c = 0; c < stats.grad.cols(); ++c)
              stats.grad(r, c) += delta * feat[static_cast<std::size_t>(c)];
          }
        }
        state = step_state(state, group.question, tok);
      }
    }
    objective += group_objective / static_cast<double>(g);
  }

  stats.loss = -objective / static_cast<double>(batch.size());
  stats.clip_fraction =
      total_tokens > 0
          ? static_cast<double>(clipped_tokens) / static_cast<double>(total_tokens)
          : 0.0;
  return stats;
}

OptimizerState make_optimizer_state(int rows, int cols) {
  return OptimizerState{Matrix(rows, cols), Matrix(rows, cols), 0};
}

void adam_step(PolicyParams& params, const Matrix& grad, OptimizerState& state,
               double lr, double beta1, double beta2, double eps) {
  if (!grad.same_shape(params.weights) || !state.m.same_shape(params.weights) ||
      !state.v.same_shape(params.weights))
    throw std::invalid_argument("adam_step: shape mismatch");
  state.count += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.count));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.count));
  auto& w = params.weights.data();
  auto& m = state.m.data();
  auto& v = state.v.data();
  const auto& g = grad.data();
  for (std::size_t i = 0; i < w.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    w[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace oscrl
