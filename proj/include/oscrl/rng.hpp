#pragma once

#include <cstdint>
#include <initializer_list>

namespace oscrl {

// splitmix64 generator. Every random decision in the project runs on a
// stream derived from the master seed plus the integer coordinates of the
// decision (step, batch slot, sample index), so results never depend on
// execution order and a run can be reproduced from the seed alone.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  // splitmix64 finalizer
  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static uint64_t derive(uint64_t seed, uint64_t id) {
    return mix(seed + 0x9e3779b97f4a7c15ull * (id + 0x632be59bd9b4e019ull));
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // in [0, 1), 53-bit resolution
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // in [0, n); multiply-shift reduction (bias < n / 2^64, irrelevant here)
  uint64_t bounded(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // inclusive range
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(bounded(static_cast<uint64_t>(hi - lo) + 1));
  }

 private:
  uint64_t state_;
};

inline uint64_t derive_seed(uint64_t seed, std::initializer_list<uint64_t> ids) {
  for (uint64_t id : ids) seed = Rng::derive(seed, id);
  return seed;
}

}  // namespace oscrl
