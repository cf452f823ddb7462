#include "oscrl/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "oscrl/csv.hpp"

namespace oscrl {

AccCrReport acc_cr(const std::vector<BenchRow>& rows, AccCrMode mode) {
  if (rows.empty()) throw std::invalid_argument("acc_cr: no benchmark rows");
  AccCrReport report;
  double sum_delta = 0.0, sum_cr = 0.0, sum_ratio = 0.0;
  for (const BenchRow& row : rows) {
    if (row.acc_init <= 0.0)
      throw std::invalid_argument("acc_cr: zero initial accuracy for " + row.name);
    if (row.len_init <= 0.0 || row.len_cur <= 0.0)
      throw std::invalid_argument("acc_cr: non-positive length for " + row.name);
    AccCrReport::Entry e;
    e.name = row.name;
    e.delta_acc = std::max(row.acc_cur / row.acc_init - 1.0, 0.0);
    e.cr = row.len_cur / row.len_init;
    sum_delta += e.delta_acc;
    sum_cr += e.cr;
    sum_ratio += e.delta_acc / e.cr;
    report.rows.push_back(std::move(e));
  }
  const double n = static_cast<double>(rows.size());
  report.aggregate = mode == AccCrMode::mean_of_components
                         ? (sum_delta / n) / (sum_cr / n)
                         : sum_ratio / n;
  return report;
}

MarkerStats marker_frequency(const std::vector<std::vector<Token>>& responses,
                             std::span<const Token> markers) {
  long long marker_count = 0;
  long long token_count = 0;
  for (const auto& tokens : responses) {
    token_count += static_cast<long long>(tokens.size());
    for (Token t : tokens)
      if (std::find(markers.begin(), markers.end(), t) != markers.end())
        ++marker_count;
  }
  MarkerStats stats;
  if (!responses.empty())
    stats.per_response =
        static_cast<double>(marker_count) / static_cast<double>(responses.size());
  if (token_count > 0)
    stats.per_1k_tokens =
        1000.0 * static_cast<double>(marker_count) / static_cast<double>(token_count);
  return stats;
}

EntropySummary entropy_summary(const std::vector<double>& trace, int window,
                               int cycle_len) {
  if (window < 1) throw std::invalid_argument("entropy_summary: window must be >= 1");
  if (cycle_len < 1)
    throw std::invalid_argument("entropy_summary: cycle_len must be >= 1");
  const int n = static_cast<int>(trace.size());
  EntropySummary summary;
  summary.smoothed.reserve(trace.size());
  const int lo_span = (window - 1) / 2;
  const int hi_span = window / 2;
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - lo_span);
    const int hi = std::min(n - 1, i + hi_span);
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) sum += trace[static_cast<std::size_t>(j)];
    summary.smoothed.push_back(sum / static_cast<double>(hi - lo + 1));
  }
  for (int start = 0; start + cycle_len <= n; start += cycle_len) {
    EntropySummary::CycleExtrema ex;
    ex.cycle = start / cycle_len;
    ex.min = ex.max = summary.smoothed[static_cast<std::size_t>(start)];
    for (int j = start; j < start + cycle_len; ++j) {
      ex.min = std::min(ex.min, summary.smoothed[static_cast<std::size_t>(j)]);
      ex.max = std::max(ex.max, summary.smoothed[static_cast<std::size_t>(j)]);
    }
    summary.cycles.push_back(ex);
  }
  return summary;
}

std::vector<ParetoPoint> pareto_frontier(std::vector<ParetoPoint> points) {
  std::sort(points.begin(), points.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    if (a.mean_length != b.mean_length) return a.mean_length < b.mean_length;
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    return a.label < b.label;
  });
  std::vector<ParetoPoint> frontier;
  for (const ParetoPoint& p : points) {
    if (frontier.empty()) {
      frontier.push_back(p);
      continue;
    }
    const ParetoPoint& last = frontier.back();
    if (p.accuracy > last.accuracy) {
      frontier.push_back(p);
    } else if (p.accuracy == last.accuracy && p.mean_length == last.mean_length) {
      // exact duplicate of a kept point: neither dominates the other
      frontier.push_back(p);
    }
  }
  return frontier;
}

namespace {

std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open table file: " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (header) {
      const std::vector<std::string> expected{"model", "bench",   "acc_init",
                                              "len_init", "acc_cur", "len_cur"};
      if (fields != expected)
        throw std::runtime_error("unexpected table header in " + path.string());
      header = false;
      continue;
    }
    if (fields.size() != 6)
      throw std::runtime_error("malformed table row: '" + line + "'");
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

std::vector<BenchRow> load_bench_table(const std::filesystem::path& path,
                                       const std::string& model) {
  std::vector<BenchRow> out;
  for (const auto& fields : read_table(path)) {
    if (fields[0] != model) continue;
    BenchRow row;
    row.name = fields[1];
    row.acc_init = parse_double(fields[2]);
    row.len_init = parse_double(fields[3]);
    row.acc_cur = parse_double(fields[4]);
    row.len_cur = parse_double(fields[5]);
    out.push_back(std::move(row));
  }
  if (out.empty())
    throw std::runtime_error("no rows for model '" + model + "' in " + path.string());
  return out;
}

std::vector<std::string> bench_table_models(const std::filesystem::path& path) {
  std::vector<std::string> models;
  for (const auto& fields : read_table(path))
    if (std::find(models.begin(), models.end(), fields[0]) == models.end())
      models.push_back(fields[0]);
  return models;
}

}  // namespace oscrl
