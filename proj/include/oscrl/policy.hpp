#pragma once

#include <span>
#include <vector>

#include "oscrl/env.hpp"
#include "oscrl/matrix.hpp"
#include "oscrl/rng.hpp"

namespace oscrl {

// Linear-softmax autoregressive policy over scratch-state features.
struct PolicyParams {
  Matrix weights;  // vocab::kSize x feature_dim(k_max)

  bool operator==(const PolicyParams&) const = default;
};

// Zero weights except an optional positive bias on the WAIT row: a fresh
// policy that already leans on filler verification tokens.
PolicyParams initial_params(int k_max, double wait_bias = 1.5);

// weights . feat
std::vector<double> logits(const PolicyParams& params, std::span<const double> feat);

// softmax(logits / temperature), max-subtraction stabilized
std::vector<double> token_probs(const PolicyParams& params,
                                std::span<const double> feat, double temperature);

double logprob(const PolicyParams& params, std::span<const double> feat,
               Token token, double temperature);

Token sample_token(const PolicyParams& params, std::span<const double> feat,
                   double temperature, Rng& rng);

// -sum p log p, in [0, log |vocab|]
double entropy(const PolicyParams& params, std::span<const double> feat,
               double temperature);

// d logprob(token) / d weights at temperature 1:
// (onehot(token) - softmax(logits)) outer feat
Matrix grad_logprob(const PolicyParams& params, std::span<const double> feat,
                    Token token);

// Autoregressive sampling threaded through the scratch automaton; stops at
// EOS or after cap tokens. Recorded logprobs are at the given temperature.
Response rollout(const PolicyParams& params, const Question& q, int cap,
                 double temperature, Rng& rng, int k_max);

// Replay of a fixed token sequence: per-token logprobs under the given
// params. Matches Response::logprobs exactly when params and temperature
// match the rollout.
std::vector<double> response_logprobs(const PolicyParams& params, const Question& q,
                                      std::span<const Token> tokens,
                                      double temperature, int k_max);

// Sum of the policy entropies at each state visited while emitting tokens.
double total_token_entropy(const PolicyParams& params, const Question& q,
                           std::span<const Token> tokens, double temperature,
                           int k_max);

}  // namespace oscrl
