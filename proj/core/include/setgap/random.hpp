#pragma once

#include <cstdint>
#include <random>

namespace setgap {

/// Deterministic RNG. Doubles are produced from raw mt19937_64 output so the
/// stream is identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double unit() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// Standard normal via Box-Muller.
  double normal();

  /// Uniform integer in [0, n). Rejection sampled, unbiased.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Mixes a stream index into a base seed so parallel consumers get
/// independent, reproducible streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace setgap
