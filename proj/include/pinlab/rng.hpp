#pragma once

#include <cstdint>

namespace pinlab {

// splitmix64: 64-bit state, one full-avalanche mix per output.
// Small, fast, and good enough statistically for Monte Carlo replica work;
// every consumer in this project derives an independent stream per task.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1), 53 random bits.
  double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Deterministic child seed for task `index` under a master seed.
// Distinct indices give distinct child states before mixing, and the mix is a
// bijection, so children never collide for a fixed master.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return SplitMix64(master + (index + 1) * 0x9E3779B97F4A7C15ull).next();
}

}  // namespace pinlab
