#pragma once

#include <cstdint>

namespace varicon {

// Deterministic xorshift64* generator.  State update per draw:
//
//   s ^= s >> 12;  s ^= s << 25;  s ^= s >> 27;
//   output = s * 2685821657736338717
//
// A zero seed is remapped to a fixed nonzero constant (the state must never
// be zero).  Every randomized check in the engine draws from this generator
// so that a scenario's seed pins its entire run.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 2685821657736338717ull;
  }

  // Uniform in [0, 1): the top 53 bits scaled by 2^-53.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Uniform integer in [0, n).
  int next_below(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

 private:
  std::uint64_t state_;
};

}  // namespace varicon
