#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace bessrl {

// Mixes a seed with a stream tag so independent consumers (init, per-update
// rollouts, synthetic data) get decorrelated, reproducible streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined word
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic RNG. The engine is std::mt19937_64, whose output sequence the
// standard pins down exactly; the uniform/normal mappings are implemented here
// rather than via std::*_distribution (those are implementation-defined and
// would break run-to-run reproducibility across standard libraries).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller; the spare value is discarded so the
  // draw count per call is fixed
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // integer in [lo, hi] inclusive
  int uniform_int(int lo, int hi) {
    int span = hi - lo + 1;
    int k = static_cast<int>(uniform() * span);
    if (k >= span) k = span - 1;
    return lo + k;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bessrl
