#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace oscrl {

enum class ScheduleKind { stair, cosine, stair_cosine };

ScheduleKind schedule_kind_from_name(const std::string& name);
std::string schedule_kind_name(ScheduleKind kind);

// Token-cap schedule. One compression-expansion cycle spans cycle_len steps:
// the cap starts at l_max, descends to l_min mid-cycle and returns to l_max,
// so all kinds share a phase origin and can be compared directly.
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::cosine;
  int l_max = 0;
  int l_min = 0;
  int cycle_len = 0;  // steps per cycle
  int n_cycles = 1;

  long long total_steps() const {
    return static_cast<long long>(cycle_len) * n_cycles;
  }

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Real-valued schedule evaluated at phase in [0, 2*pi); the pre-rounding
// curve behind cap_at. Exposed so boundary continuity can be checked exactly.
double cap_value(const ScheduleSpec& spec, double phase);

// Maximum rollout length at step t >= 0. Periodic with period cycle_len;
// nearest-integer rounded and always within [l_min, l_max].
int cap_at(const ScheduleSpec& spec, long long t);

// cap_at for t = 0..t_end-1, in order.
std::vector<std::pair<long long, int>> dump_curve(const ScheduleSpec& spec,
                                                  long long t_end);

// CSV with header "step,cap", one row per step.
void write_curve_csv(const std::vector<std::pair<long long, int>>& curve,
                     std::ostream& out);

}  // namespace oscrl
