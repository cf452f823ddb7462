#pragma once

#include <string>
#include <vector>

#include "oscrl/env.hpp"
#include "oscrl/matrix.hpp"
#include "oscrl/policy.hpp"

namespace oscrl {

// Decoupled clip thresholds; the KL coefficient stays as an ablation knob
// and defaults to off.
struct ClipSpec {
  double eps_low = 0.2;
  double eps_high = 0.28;
  double kl_coef = 0.0;

  void validate() const;
  bool operator==(const ClipSpec&) const = default;
};

// Per-response 1/|y| weighting by default; "token" divides by the group's
// total token count instead.
enum class LossNorm { response, token };
LossNorm loss_norm_from_name(const std::string& name);
std::string loss_norm_name(LossNorm norm);

// G responses to one question. Response::logprobs are the rollout-time
// ("old") side of the probability ratio; the advantage is shared by every
// token of its response.
struct Group {
  Question question;
  std::vector<Response> responses;
  std::vector<double> rewards;     // {0,1}
  std::vector<double> advantages;  // one per response
};

// 1 iff a correct answer can be extracted from the first `cap` tokens.
double capped_reward(const Question& q, const Response& resp, int cap);

// (r - mean) / population std; all zeros when the group is degenerate
// (std < 1e-8). Requires at least 2 rewards.
std::vector<double> group_advantages(const std::vector<double>& rewards);

struct LossStats {
  double loss = 0.0;
  Matrix grad;               // d loss / d weights
  double clip_fraction = 0.0;  // tokens where the clipped branch binds
};

// Clipped surrogate over the batch: per token
//   term = min(r * A, clip(r, 1-eps_low, 1+eps_high) * A),  r = exp(new - old),
// averaged per response (or per group token count), per group, over groups;
// loss is the negative mean. New logprobs and the analytic gradient come from
// replaying each response under `params` at temperature 1. Tokens where the
// clip binds contribute no gradient.
LossStats surrogate_loss(const std::vector<Group>& batch, const PolicyParams& params,
                         const ClipSpec& clip, int k_max,
                         LossNorm norm = LossNorm::response);

struct OptimizerState {
  Matrix m;  // first moments
  Matrix v;  // second moments
  long long count = 0;

  bool operator==(const OptimizerState&) const = default;
};

OptimizerState make_optimizer_state(int rows, int cols);

// Bias-corrected adaptive-moment update, in place.
void adam_step(PolicyParams& params, const Matrix& grad, OptimizerState& state,
               double lr, double beta1 = 0.9, double beta2 = 0.999,
               double eps = 1e-8);

}  // namespace oscrl
