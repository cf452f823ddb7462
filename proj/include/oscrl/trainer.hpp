#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oscrl/env.hpp"
#include "oscrl/policy.hpp"
#include "oscrl/rl_core.hpp"
#include "oscrl/schedule.hpp"

namespace oscrl {

struct TrainConfig {
  ScheduleSpec schedule;
  int group_size = 8;        // rollouts per question
  int batch_questions = 16;  // questions per step
  int inner_epochs = 2;      // optimizer passes per rollout phase
  double lr = 5e-3;
  ClipSpec clip;
  double train_temperature = 1.0;
  double eval_temperature = 0.6;
  int eval_samples = 16;
  uint64_t seed = 0;
  int train_size = 256;
  int eval_size = 32;
  int eval_every = 10;
  int k_range_min = 4;  // question lengths, inclusive
  int k_range_max = 8;
  int k_max = 12;  // feature-layout bound on `remaining`
  LossNorm loss_norm = LossNorm::response;
  double init_wait_bias = 1.5;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

TrainConfig load_config(const std::filesystem::path& path);
void save_config(const TrainConfig& config, const std::filesystem::path& path);
std::string config_to_json(const TrainConfig& config);
TrainConfig config_from_json(const std::string& text);

// One row of the per-step telemetry CSV.
struct MetricsRecord {
  long long step = 0;
  int cap = 0;
  double reward_mean = 0;
  double pass1_train = 0;
  double mean_len = 0;
  double entropy_mean = 0;
  double wait_per_1k = 0;
  double loss = 0;
  double clip_frac = 0;
};

struct EvalRecord {
  long long step = 0;
  double pass1 = 0;
  double mean_len = 0;
};

inline constexpr int kCheckpointVersion = 1;

struct CheckpointRecord {
  int version = kCheckpointVersion;
  long long step = 0;  // next step to run
  PolicyParams params;
  OptimizerState opt;
  uint64_t rng_seed = 0;
  TrainConfig config;

  bool operator==(const CheckpointRecord&) const = default;
};

enum class CheckpointErrorKind { missing_file, corrupt_payload, version_mismatch };

class CheckpointError : public std::runtime_error {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  CheckpointErrorKind kind() const { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

void save_checkpoint(const CheckpointRecord& record,
                     const std::filesystem::path& path);
CheckpointRecord load_checkpoint(const std::filesystem::path& path);

struct EvalResult {
  double pass1 = 0;
  double mean_len = 0;
};

// pass@1 over n_samples rollouts per question, scoring the cap-clipped
// prefix; mean length over all rollouts.
EvalResult evaluate(const PolicyParams& params, const std::vector<Question>& questions,
                    int n_samples, double temperature, int cap,
                    uint64_t stream_seed, int k_max);

struct TrainResult {
  CheckpointRecord final_checkpoint;
  std::vector<MetricsRecord> metrics;  // one per executed step
  std::vector<EvalRecord> evals;
};

// Runs the full schedule, writing metrics.csv, eval.csv and checkpoints
// under out_dir. Deterministic given config.seed.
TrainResult train(const TrainConfig& config, const std::filesystem::path& out_dir);

// Continues a run from a saved checkpoint; reproduces the original run's
// remaining records exactly.
TrainResult resume(const CheckpointRecord& checkpoint,
                   const std::filesystem::path& out_dir);

void write_metrics_csv(const std::vector<MetricsRecord>& records,
                       const std::filesystem::path& path);
void write_eval_csv(const std::vector<EvalRecord>& records,
                    const std::filesystem::path& path);

// Training/eval question sets are derived from the config, not stored.
std::vector<Question> train_questions(const TrainConfig& config);
std::vector<Question> eval_questions(const TrainConfig& config);

}  // namespace oscrl
