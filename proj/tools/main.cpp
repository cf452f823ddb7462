#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "oscrl/csv.hpp"
#include "oscrl/metrics.hpp"
#include "oscrl/schedule.hpp"
#include "oscrl/trainer.hpp"

namespace {

using namespace oscrl;

std::vector<Token> parse_markers(const std::string& spec) {
  std::vector<Token> markers;
  for (const auto& item : split_csv(spec)) {
    if (const auto tok = vocab::from_name(item)) {
      markers.push_back(*tok);
      continue;
    }
    try {
      const long long idx = parse_int(item);
      if (!vocab::is_valid(static_cast<Token>(idx)))
        throw std::runtime_error("marker token out of range: " + item);
      markers.push_back(static_cast<Token>(idx));
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("unknown marker token: '" + item + "'");
    }
  }
  if (markers.empty()) throw std::runtime_error("no marker tokens given");
  return markers;
}

std::vector<std::vector<Token>> load_rollouts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rollouts file: " + path.string());
  std::vector<std::vector<Token>> rollouts;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("bad rollout line " + std::to_string(line_no) + ": " +
                               e.what());
    }
    const nlohmann::json& arr = j.is_object() ? j.at("tokens") : j;
    std::vector<Token> tokens;
    for (const auto& v : arr) {
      const Token t = v.get<Token>();
      if (!vocab::is_valid(t))
        throw std::runtime_error("invalid token index on line " +
                                 std::to_string(line_no));
      tokens.push_back(t);
    }
    rollouts.push_back(std::move(tokens));
  }
  return rollouts;
}

std::vector<ParetoPoint> load_points(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open points file: " + path.string());
  std::vector<ParetoPoint> points;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (header) {
      if (fields.size() < 2 || fields[0] != "length" || fields[1] != "accuracy")
        throw std::runtime_error("points file must start with 'length,accuracy[,label]'");
      header = false;
      continue;
    }
    if (fields.size() != 2 && fields.size() != 3)
      throw std::runtime_error("malformed points row: '" + line + "'");
    ParetoPoint p;
    p.mean_length = parse_double(fields[0]);
    p.accuracy = parse_double(fields[1]);
    if (fields.size() == 3) p.label = fields[2];
    points.push_back(std::move(p));
  }
  return points;
}

int run(int argc, char** argv) {
  CLI::App app{"Desk-scale RL lab: cyclic rollout-length budgets with "
               "group-relative policy optimization on a synthetic chain-sum task"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand(
      "train", "Run training from a config file (or resume from a checkpoint)");
  std::string config_path, out_dir, resume_path;
  std::optional<uint64_t> seed_override;
  train_cmd->add_option("--config", config_path, "Config file (JSON)");
  train_cmd->add_option("--out", out_dir, "Output directory")->required();
  train_cmd->add_option("--resume", resume_path, "Checkpoint to resume from");
  train_cmd->add_option("--seed", seed_override,
                        "Master seed (overrides the config file value)");

  // eval
  auto* eval_cmd =
      app.add_subcommand("eval", "Evaluate a checkpoint on its eval question set");
  std::string eval_ckpt;
  std::optional<int> eval_n, eval_cap;
  std::optional<double> eval_temp;
  uint64_t eval_seed = 0;
  eval_cmd->add_option("--ckpt", eval_ckpt, "Checkpoint file")->required();
  eval_cmd->add_option("--n", eval_n, "Samples per question (default: config value)");
  eval_cmd->add_option("--temp", eval_temp, "Sampling temperature (default: config value)");
  eval_cmd->add_option("--cap", eval_cap, "Token cap (default: schedule l_max)");
  eval_cmd->add_option("--seed", eval_seed, "Sampling seed (default 0)");

  // schedule
  auto* sched_cmd =
      app.add_subcommand("schedule", "Dump a token-cap curve to CSV");
  std::string sched_kind = "cosine", sched_out;
  int sched_lmax = 0, sched_lmin = 0, sched_cycle = 0;
  long long sched_steps = 0;
  sched_cmd->add_option("--kind", sched_kind, "stair | cosine | stair_cosine")
      ->required();
  sched_cmd->add_option("--lmax", sched_lmax, "Upper cap")->required();
  sched_cmd->add_option("--lmin", sched_lmin, "Lower cap")->required();
  sched_cmd->add_option("--cycle", sched_cycle, "Cycle length in steps")->required();
  sched_cmd->add_option("--steps", sched_steps, "Number of steps to dump")->required();
  sched_cmd->add_option("--out", sched_out, "Output CSV path")->required();

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Analysis reports (CSV to stdout)");
  analyze_cmd->require_subcommand(1);

  auto* acc_cmd = analyze_cmd->add_subcommand(
      "acc-cr", "Accuracy-gain over compressed-ratio efficiency score");
  std::string acc_table, acc_model;
  bool acc_ratio_mean = false, acc_per_bench = false;
  acc_cmd->add_option("--table", acc_table, "Benchmark table CSV")->required();
  acc_cmd->add_option("--model", acc_model, "Single model to score (default: all)");
  acc_cmd->add_flag("--ratio-mean", acc_ratio_mean,
                    "Aggregate as mean of per-benchmark ratios instead of "
                    "mean(delta_acc)/mean(cr)");
  acc_cmd->add_flag("--per-bench", acc_per_bench, "Print per-benchmark rows");

  auto* tokens_cmd =
      analyze_cmd->add_subcommand("tokens", "Marker-token frequency over rollouts");
  std::string tokens_file, tokens_markers = "WAIT";
  tokens_cmd->add_option("--rollouts", tokens_file,
                         "Rollout file: one JSON token array per line")
      ->required();
  tokens_cmd->add_option("--markers", tokens_markers,
                         "Comma-separated token names or indices (default WAIT)");

  auto* pareto_cmd =
      analyze_cmd->add_subcommand("pareto", "Non-dominated (length, accuracy) subset");
  std::string pareto_file;
  pareto_cmd->add_option("--points", pareto_file,
                         "CSV with header length,accuracy[,label]")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (train_cmd->parsed()) {
      if (config_path.empty() == resume_path.empty())
        throw std::runtime_error("train needs exactly one of --config or --resume");
      if (!resume_path.empty()) {
        if (seed_override)
          throw std::runtime_error("--seed cannot be combined with --resume");
        const auto record = load_checkpoint(resume_path);
        resume(record, out_dir);
      } else {
        TrainConfig config = load_config(config_path);
        if (seed_override) config.seed = *seed_override;
        train(config, out_dir);
      }
      std::cout << "wrote " << out_dir << "/metrics.csv, eval.csv and checkpoints\n";
    } else if (eval_cmd->parsed()) {
      const auto record = load_checkpoint(eval_ckpt);
      const auto questions = eval_questions(record.config);
      const int n = eval_n.value_or(record.config.eval_samples);
      const double temp = eval_temp.value_or(record.config.eval_temperature);
      const int cap = eval_cap.value_or(record.config.schedule.l_max);
      const EvalResult r =
          evaluate(record.params, questions, n, temp, cap, eval_seed, record.config.k_max);
      std::cout << "pass1,mean_len\n"
                << format_double(r.pass1) << ',' << format_double(r.mean_len) << '\n';
    } else if (sched_cmd->parsed()) {
      ScheduleSpec spec;
      spec.kind = schedule_kind_from_name(sched_kind);
      spec.l_max = sched_lmax;
      spec.l_min = sched_lmin;
      spec.cycle_len = sched_cycle;
      spec.n_cycles = 1;
      spec.validate();
      const auto curve = dump_curve(spec, sched_steps);
      std::ofstream out(sched_out);
      if (!out) throw std::runtime_error("cannot open for writing: " + sched_out);
      write_curve_csv(curve, out);
    } else if (acc_cmd->parsed()) {
      const auto mode =
          acc_ratio_mean ? AccCrMode::mean_of_ratios : AccCrMode::mean_of_components;
      const auto models = acc_model.empty()
                              ? bench_table_models(acc_table)
                              : std::vector<std::string>{acc_model};
      if (acc_per_bench) {
        std::cout << "model,bench,delta_acc,cr\n";
        for (const auto& model : models) {
          const auto report = acc_cr(load_bench_table(acc_table, model), mode);
          for (const auto& row : report.rows)
            std::cout << model << ',' << row.name << ',' << format_double(row.delta_acc)
                      << ',' << format_double(row.cr) << '\n';
        }
      } else {
        std::cout << "model,aggregate\n";
        for (const auto& model : models) {
          const auto report = acc_cr(load_bench_table(acc_table, model), mode);
          std::cout << model << ',' << format_double(report.aggregate) << '\n';
        }
      }
    } else if (tokens_cmd->parsed()) {
      const auto rollouts = load_rollouts(tokens_file);
      const auto markers = parse_markers(tokens_markers);
      const MarkerStats stats = marker_frequency(rollouts, markers);
      std::cout << "per_response,per_1k_tokens\n"
                << format_double(stats.per_response) << ','
                << format_double(stats.per_1k_tokens) << '\n';
    } else if (pareto_cmd->parsed()) {
      const auto frontier = pareto_frontier(load_points(pareto_file));
      std::cout << "length,accuracy,label\n";
      for (const auto& p : frontier)
        std::cout << format_double(p.mean_length) << ',' << format_double(p.accuracy)
                  << ',' << p.label << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
