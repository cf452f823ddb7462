#include "oscrl/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace oscrl {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kQuarterPi = 0.25 * kPi;
}  // namespace

ScheduleKind schedule_kind_from_name(const std::string& name) {
  if (name == "stair") return ScheduleKind::stair;
  if (name == "cosine") return ScheduleKind::cosine;
  if (name == "stair_cosine") return ScheduleKind::stair_cosine;
  throw std::invalid_argument("unknown schedule kind: '" + name + "'");
}

std::string schedule_kind_name(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::stair: return "stair";
    case ScheduleKind::cosine: return "cosine";
    case ScheduleKind::stair_cosine: return "stair_cosine";
  }
  throw std::logic_error("bad ScheduleKind");
}

void ScheduleSpec::validate() const {
  if (l_min < 1) throw std::invalid_argument("schedule.l_min must be >= 1");
  if (l_min > l_max) throw std::invalid_argument("schedule.l_min must be <= l_max");
  if (cycle_len < 2) throw std::invalid_argument("schedule.cycle_len must be >= 2");
  if (n_cycles < 1) throw std::invalid_argument("schedule.n_cycles must be >= 1");
}

double cap_value(const ScheduleSpec& spec, double phase) {
  const double mid = 0.5 * (spec.l_max + spec.l_min);
  const double half = 0.5 * (spec.l_max - spec.l_min);
  switch (spec.kind) {
    case ScheduleKind::stair:
      return phase < kPi ? spec.l_max : spec.l_min;
    case ScheduleKind::cosine:
      return mid + half * std::cos(phase);
    case ScheduleKind::stair_cosine:
      if (phase < kQuarterPi || phase >= 7.0 * kQuarterPi) return spec.l_max;
      if (phase < 3.0 * kQuarterPi)
        return mid + half * std::cos(2.0 * (phase - kQuarterPi));
      if (phase < 5.0 * kQuarterPi) return spec.l_min;
      return mid + half * std::cos(2.0 * (phase - 3.0 * kQuarterPi));
  }
  throw std::logic_error("bad ScheduleKind");
}

int cap_at(const ScheduleSpec& spec, long long t) {
  if (t < 0) throw std::invalid_argument("cap_at: t must be >= 0");
  const long long m = t % spec.cycle_len;
  const double phase =
      kTwoPi * (static_cast<double>(m) / static_cast<double>(spec.cycle_len));
  const long long rounded = std::llround(cap_value(spec, phase));
  const long long clamped = std::clamp<long long>(rounded, spec.l_min, spec.l_max);
  return static_cast<int>(clamped);
}

std::vector<std::pair<long long, int>> dump_curve(const ScheduleSpec& spec,
                                                  long long t_end) {
  if (t_end < 1) throw std::invalid_argument("dump_curve: t_end must be >= 1");
  std::vector<std::pair<long long, int>> curve;
  curve.reserve(static_cast<std::size_t>(t_end));
  for (long long t = 0; t < t_end; ++t) curve.emplace_back(t, cap_at(spec, t));
  return curve;
}

void write_curve_csv(const std::vector<std::pair<long long, int>>& curve,
                     std::ostream& out) {
  out << "step,cap\n";
  for (const auto& [t, cap] : curve) out << t << ',' << cap << '\n';
}

}  // namespace oscrl
