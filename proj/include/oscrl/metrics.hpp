#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "oscrl/env.hpp"

namespace oscrl {

// One benchmark line: accuracy (percent) and mean response length of the
// initial model vs the current model.
struct BenchRow {
  std::string name;
  double acc_init = 0;
  double len_init = 0;
  double acc_cur = 0;
  double len_cur = 0;
};

// Aggregation rule for the efficiency score: mean(delta_acc)/mean(cr) by
// default; mean of per-benchmark delta_acc/cr ratios behind the alternative.
enum class AccCrMode { mean_of_components, mean_of_ratios };

struct AccCrReport {
  struct Entry {
    std::string name;
    double delta_acc = 0;  // max(acc_cur/acc_init - 1, 0)
    double cr = 0;         // len_cur / len_init
  };
  std::vector<Entry> rows;
  double aggregate = 0;
};

AccCrReport acc_cr(const std::vector<BenchRow>& rows,
                   AccCrMode mode = AccCrMode::mean_of_components);

struct MarkerStats {
  double per_response = 0;
  double per_1k_tokens = 0;
};

MarkerStats marker_frequency(const std::vector<std::vector<Token>>& responses,
                             std::span<const Token> markers);

struct EntropySummary {
  std::vector<double> smoothed;  // centered moving average, shrinking at edges
  struct CycleExtrema {
    long long cycle = 0;
    double min = 0;
    double max = 0;
  };
  std::vector<CycleExtrema> cycles;  // complete cycles only
};

EntropySummary entropy_summary(const std::vector<double>& trace, int window,
                               int cycle_len);

struct ParetoPoint {
  double mean_length = 0;
  double accuracy = 0;
  std::string label;
};

// Points not dominated by any other (shorter-or-equal and
// better-or-equal, one strictly), sorted by length ascending.
std::vector<ParetoPoint> pareto_frontier(std::vector<ParetoPoint> points);

// Fixture access: CSV with header model,bench,acc_init,len_init,acc_cur,len_cur.
std::vector<BenchRow> load_bench_table(const std::filesystem::path& path,
                                       const std::string& model);
std::vector<std::string> bench_table_models(const std::filesystem::path& path);

}  // namespace oscrl
