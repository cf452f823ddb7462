#include "oscrl/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "oscrl/csv.hpp"
#include "oscrl/metrics.hpp"
#include "oscrl/rng.hpp"

namespace oscrl {

namespace {

// Stream ids for seed derivation; fixed forever (reproducibility contract).
enum StreamTag : uint64_t {
  kTagTrainSet = 1,
  kTagEvalSet = 2,
  kTagQuestionSample = 3,
  kTagRollout = 4,
  kTagEval = 5,
};

using ordered_json = nlohmann::ordered_json;

ordered_json schedule_to_json(const ScheduleSpec& s) {
  ordered_json j;
  j["kind"] = schedule_kind_name(s.kind);
  j["l_max"] = s.l_max;
  j["l_min"] = s.l_min;
  j["cycle_len"] = s.cycle_len;
  j["n_cycles"] = s.n_cycles;
  return j;
}

ScheduleSpec schedule_from_json(const nlohmann::json& j) {
  ScheduleSpec s;
  s.kind = schedule_kind_from_name(j.at("kind").get<std::string>());
  s.l_max = j.at("l_max").get<int>();
  s.l_min = j.at("l_min").get<int>();
  s.cycle_len = j.at("cycle_len").get<int>();
  s.n_cycles = j.at("n_cycles").get<int>();
  return s;
}

ordered_json config_to_json_obj(const TrainConfig& c) {
  ordered_json j;
  j["schedule"] = schedule_to_json(c.schedule);
  j["group_size"] = c.group_size;
  j["batch_questions"] = c.batch_questions;
  j["inner_epochs"] = c.inner_epochs;
  j["lr"] = c.lr;
  j["clip"] = {{"eps_low", c.clip.eps_low},
               {"eps_high", c.clip.eps_high},
               {"kl_coef", c.clip.kl_coef}};
  j["train_temperature"] = c.train_temperature;
  j["eval_temperature"] = c.eval_temperature;
  j["eval_samples"] = c.eval_samples;
  j["seed"] = c.seed;
  j["train_size"] = c.train_size;
  j["eval_size"] = c.eval_size;
  j["eval_every"] = c.eval_every;
  j["k_range"] = {c.k_range_min, c.k_range_max};
  j["k_max"] = c.k_max;
  j["loss_norm"] = loss_norm_name(c.loss_norm);
  j["init_wait_bias"] = c.init_wait_bias;
  return j;
}

TrainConfig config_from_json_obj(const nlohmann::json& j) {
  TrainConfig c;
  c.schedule = schedule_from_json(j.at("schedule"));
  c.group_size = j.value("group_size", c.group_size);
  c.batch_questions = j.value("batch_questions", c.batch_questions);
  c.inner_epochs = j.value("inner_epochs", c.inner_epochs);
  c.lr = j.value("lr", c.lr);
  if (j.contains("clip")) {
    const auto& jc = j.at("clip");
    c.clip.eps_low = jc.value("eps_low", c.clip.eps_low);
    c.clip.eps_high = jc.value("eps_high", c.clip.eps_high);
    c.clip.kl_coef = jc.value("kl_coef", c.clip.kl_coef);
  }
  c.train_temperature = j.value("train_temperature", c.train_temperature);
  c.eval_temperature = j.value("eval_temperature", c.eval_temperature);
  c.eval_samples = j.value("eval_samples", c.eval_samples);
  c.seed = j.value("seed", c.seed);
  c.train_size = j.value("train_size", c.train_size);
  c.eval_size = j.value("eval_size", c.eval_size);
  c.eval_every = j.value("eval_every", c.eval_every);
  if (j.contains("k_range")) {
    const auto& kr = j.at("k_range");
    if (!kr.is_array() || kr.size() != 2)
      throw std::invalid_argument("config: k_range must be [min, max]");
    c.k_range_min = kr[0].get<int>();
    c.k_range_max = kr[1].get<int>();
  }
  c.k_max = j.value("k_max", c.k_max);
  if (j.contains("loss_norm"))
    c.loss_norm = loss_norm_from_name(j.at("loss_norm").get<std::string>());
  c.init_wait_bias = j.value("init_wait_bias", c.init_wait_bias);
  return c;
}

ordered_json matrix_to_json(const Matrix& m) {
  ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = m.data();  // flat, row-major
  return j;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 ||
      data.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    throw std::invalid_argument("matrix payload shape mismatch");
  Matrix m(rows, cols);
  m.data() = std::move(data);
  return m;
}

}  // namespace

void TrainConfig::validate() const {
  schedule.validate();
  clip.validate();
  if (group_size < 2) throw std::invalid_argument("group_size must be >= 2");
  if (batch_questions < 1) throw std::invalid_argument("batch_questions must be >= 1");
  if (inner_epochs < 1) throw std::invalid_argument("inner_epochs must be >= 1");
  if (lr < 0.0 || !std::isfinite(lr)) throw std::invalid_argument("lr must be >= 0");
  if (!(train_temperature > 0.0))
    throw std::invalid_argument("train_temperature must be > 0");
  if (!(eval_temperature > 0.0))
    throw std::invalid_argument("eval_temperature must be > 0");
  if (eval_samples < 1) throw std::invalid_argument("eval_samples must be >= 1");
  if (train_size < 1) throw std::invalid_argument("train_size must be >= 1");
  if (eval_size < 1) throw std::invalid_argument("eval_size must be >= 1");
  if (eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
  if (k_range_min < 1 || k_range_min > k_range_max)
    throw std::invalid_argument("k_range must satisfy 1 <= min <= max");
  if (k_range_max > k_max)
    throw std::invalid_argument("k_range max exceeds k_max");
}

std::string config_to_json(const TrainConfig& config) {
  return config_to_json_obj(config).dump(2) + "\n";
}

TrainConfig config_from_json(const std::string& text) {
  return config_from_json_obj(nlohmann::json::parse(text));
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return config_from_json(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("bad config file " + path.string() + ": " + e.what());
  }
}

void save_config(const TrainConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << config_to_json(config);
}

void save_checkpoint(const CheckpointRecord& record,
                     const std::filesystem::path& path) {
  ordered_json j;
  j["version"] = record.version;
  j["step"] = record.step;
  j["params"] = matrix_to_json(record.params.weights);
  j["opt"] = {{"m", matrix_to_json(record.opt.m)},
              {"v", matrix_to_json(record.opt.v)},
              {"count", record.opt.count}};
  j["rng_seed"] = record.rng_seed;
  j["config"] = config_to_json_obj(record.config);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
}

CheckpointRecord load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw CheckpointError(CheckpointErrorKind::missing_file,
                          "checkpoint not found: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(CheckpointErrorKind::corrupt_payload,
                          "corrupt checkpoint " + path.string() + ": " + e.what());
  }
  try {
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion)
      throw CheckpointError(CheckpointErrorKind::version_mismatch,
                            "checkpoint version " + std::to_string(version) +
                                " != supported " + std::to_string(kCheckpointVersion));
    CheckpointRecord record;
    record.version = version;
    record.step = j.at("step").get<long long>();
    record.params.weights = matrix_from_json(j.at("params"));
    record.opt.m = matrix_from_json(j.at("opt").at("m"));
    record.opt.v = matrix_from_json(j.at("opt").at("v"));
    record.opt.count = j.at("opt").at("count").get<long long>();
    record.rng_seed = j.at("rng_seed").get<uint64_t>();
    record.config = config_from_json_obj(j.at("config"));
    return record;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(CheckpointErrorKind::corrupt_payload,
                          "corrupt checkpoint " + path.string() + ": " + e.what());
  }
}

std::vector<Question> train_questions(const TrainConfig& config) {
  return gen_dataset(derive_seed(config.seed, {kTagTrainSet}), config.train_size,
                     config.k_range_min, config.k_range_max);
}

std::vector<Question> eval_questions(const TrainConfig& config) {
  return gen_dataset(derive_seed(config.seed, {kTagEvalSet}), config.eval_size,
                     config.k_range_min, config.k_range_max);
}

EvalResult evaluate(const PolicyParams& params, const std::vector<Question>& questions,
                    int n_samples, double temperature, int cap,
                    uint64_t stream_seed, int k_max) {
  if (questions.empty()) throw std::invalid_argument("evaluate: no questions");
  if (n_samples < 1) throw std::invalid_argument("evaluate: n_samples must be >= 1");
  double pass_sum = 0.0;
  long long len_sum = 0;
  for (std::size_t qi = 0; qi < questions.size(); ++qi) {
    int correct = 0;
    for (int si = 0; si < n_samples; ++si) {
      Rng rng(derive_seed(stream_seed,
                          {static_cast<uint64_t>(qi), static_cast<uint64_t>(si)}));
      const Response resp = rollout(params, questions[qi], cap, temperature, rng, k_max);
      correct += static_cast<int>(capped_reward(questions[qi], resp, cap));
      len_sum += static_cast<long long>(resp.tokens.size());
    }
    pass_sum += static_cast<double>(correct) / static_cast<double>(n_samples);
  }
  EvalResult result;
  result.pass1 = pass_sum / static_cast<double>(questions.size());
  result.mean_len = static_cast<double>(len_sum) /
                    static_cast<double>(questions.size() * static_cast<std::size_t>(n_samples));
  return result;
}

void write_metrics_csv(const std::vector<MetricsRecord>& records,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "step,cap,reward_mean,pass1_train,mean_len,entropy_mean,wait_per_1k,loss,clip_frac\n";
  for (const auto& r : records) {
    out << r.step << ',' << r.cap << ',' << format_double(r.reward_mean) << ','
        << format_double(r.pass1_train) << ',' << format_double(r.mean_len) << ','
        << format_double(r.entropy_mean) << ',' << format_double(r.wait_per_1k)
        << ',' << format_double(r.loss) << ',' << format_double(r.clip_frac) << '\n';
  }
}

void write_eval_csv(const std::vector<EvalRecord>& records,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "step,pass1,mean_len\n";
  for (const auto& r : records)
    out << r.step << ',' << format_double(r.pass1) << ','
        << format_double(r.mean_len) << '\n';
}

namespace {

std::string checkpoint_name(long long step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt_%06lld.json", step);
  return buf;
}

// Report where the response-length trace peaks and bottoms out relative to
// the scheduler within each cycle; the length typically trails the cap.
void print_lag_diagnostic(const std::vector<MetricsRecord>& metrics,
                          const ScheduleSpec& schedule) {
  const long long cycle = schedule.cycle_len;
  if (metrics.empty() || metrics.front().step != 0 ||
      schedule.l_max == schedule.l_min)
    return;
  for (long long start = 0; start + cycle <= static_cast<long long>(metrics.size());
       start += cycle) {
    long long argmin = start, argmax = start;
    for (long long t = start; t < start + cycle; ++t) {
      const auto idx = static_cast<std::size_t>(t);
      if (metrics[idx].mean_len < metrics[static_cast<std::size_t>(argmin)].mean_len)
        argmin = t;
      if (metrics[idx].mean_len > metrics[static_cast<std::size_t>(argmax)].mean_len)
        argmax = t;
    }
    // scheduler extrema within this cycle: max at cycle start, min at half
    const long long sched_max = start;
    const long long sched_min = start + cycle / 2;
    std::cout << "cycle " << start / cycle << ": length max at step " << argmax
              << " (cap max at " << sched_max << ", lag "
              << argmax - sched_max << "), length min at step " << argmin
              << " (cap min at " << sched_min << ", lag " << argmin - sched_min
              << ")\n";
  }
}

TrainResult run_loop(const TrainConfig& config, const std::filesystem::path& out_dir,
                     long long start_step, PolicyParams params, OptimizerState opt) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  const auto train_set = train_questions(config);
  const auto eval_set = eval_questions(config);
  const long long total_steps = config.schedule.total_steps();
  const std::vector<Token> wait_marker{vocab::kWait};

  TrainResult result;

  auto run_eval = [&](long long step) {
    const EvalResult er =
        evaluate(params, eval_set, config.eval_samples, config.eval_temperature,
                 config.schedule.l_max, derive_seed(config.seed, {kTagEval, static_cast<uint64_t>(step)}),
                 config.k_max);
    result.evals.push_back({step, er.pass1, er.mean_len});
  };
  auto save_ckpt = [&](long long step, const std::string& name) {
    CheckpointRecord record;
    record.step = step;
    record.params = params;
    record.opt = opt;
    record.rng_seed = config.seed;
    record.config = config;
    save_checkpoint(record, out_dir / name);
    return record;
  };

  for (long long t = start_step; t < total_steps; ++t) {
    if (t % config.eval_every == 0) {
      run_eval(t);
      save_ckpt(t, checkpoint_name(t));
    }

    const int cap = cap_at(config.schedule, t);

    // rollout phase
    Rng qsample(derive_seed(config.seed, {kTagQuestionSample, static_cast<uint64_t>(t)}));
    std::vector<Group> batch;
    batch.reserve(static_cast<std::size_t>(config.batch_questions));
    double reward_sum = 0.0, pass_sum = 0.0, entropy_sum = 0.0;
    long long token_sum = 0, rollout_count = 0;
    std::vector<std::vector<Token>> step_tokens;
    for (int b = 0; b < config.batch_questions; ++b) {
      const auto qidx =
          static_cast<std::size_t>(qsample.bounded(static_cast<uint64_t>(train_set.size())));
      Group group;
      group.question = train_set[qidx];
      for (int g = 0; g < config.group_size; ++g) {
        Rng rng(derive_seed(config.seed, {kTagRollout, static_cast<uint64_t>(t),
                                          static_cast<uint64_t>(b), static_cast<uint64_t>(g)}));
        Response resp = rollout(params, group.question, cap,
                                config.train_temperature, rng, config.k_max);
        const double reward = capped_reward(group.question, resp, cap);
        reward_sum += reward;
        pass_sum += verify(group.question, resp.tokens);
        entropy_sum += total_token_entropy(params, group.question, resp.tokens,
                                           config.train_temperature, config.k_max);
        token_sum += static_cast<long long>(resp.tokens.size());
        ++rollout_count;
        step_tokens.push_back(resp.tokens);
        group.rewards.push_back(reward);
        group.responses.push_back(std::move(resp));
      }
      group.advantages = group_advantages(group.rewards);
      batch.push_back(std::move(group));
    }

    // update phase
    LossStats stats;
    for (int e = 0; e < config.inner_epochs; ++e) {
      stats = surrogate_loss(batch, params, config.clip, config.k_max, config.loss_norm);
      adam_step(params, stats.grad, opt, config.lr);
    }

    MetricsRecord rec;
    rec.step = t;
    rec.cap = cap;
    rec.reward_mean = reward_sum / static_cast<double>(rollout_count);
    rec.pass1_train = pass_sum / static_cast<double>(rollout_count);
    rec.mean_len = static_cast<double>(token_sum) / static_cast<double>(rollout_count);
    rec.entropy_mean = entropy_sum / static_cast<double>(token_sum);
    rec.wait_per_1k = marker_frequency(step_tokens, wait_marker).per_1k_tokens;
    rec.loss = stats.loss;
    rec.clip_frac = stats.clip_fraction;
    result.metrics.push_back(rec);
  }

  run_eval(total_steps);
  result.final_checkpoint = save_ckpt(total_steps, "ckpt_final.json");

  write_metrics_csv(result.metrics, out_dir / "metrics.csv");
  write_eval_csv(result.evals, out_dir / "eval.csv");
  print_lag_diagnostic(result.metrics, config.schedule);
  return result;
}

}  // namespace

TrainResult train(const TrainConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  return run_loop(config, out_dir, 0,
                  initial_params(config.k_max, config.init_wait_bias),
                  make_optimizer_state(vocab::kSize, feature_dim(config.k_max)));
}

TrainResult resume(const CheckpointRecord& checkpoint,
                   const std::filesystem::path& out_dir) {
  checkpoint.config.validate();
  const int d = feature_dim(checkpoint.config.k_max);
  if (checkpoint.params.weights.rows() != vocab::kSize ||
      checkpoint.params.weights.cols() != d)
    throw CheckpointError(CheckpointErrorKind::corrupt_payload,
                          "checkpoint params shape does not match config");
  return run_loop(checkpoint.config, out_dir, checkpoint.step, checkpoint.params,
                  checkpoint.opt);
}

}  // namespace oscrl
