#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace curvox {

// Deterministic RNG. mt19937_64 is fully specified by the standard; the
// uniform/normal mappings are implemented here (not via std distributions,
// whose algorithms are implementation-defined) so that streams are pinned
// by this code on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). Modulo bias is ~n/2^64, irrelevant here;
  // determinism is what matters.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  // Standard normal via Box-Muller (cosine branch only; no cached spare,
  // so the stream position is a pure function of the call count).
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 mix for deriving independent per-item streams from a master
// seed (e.g. one stream per scene index).
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

}  // namespace curvox
