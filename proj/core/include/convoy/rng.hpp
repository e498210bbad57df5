#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace convoy {

/// Deterministic random source. The engine (mt19937_64) is pinned by the
/// standard; the distributions are implemented here instead of using
/// std::*_distribution so that traces are reproducible across standard
/// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return (engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n > 0.
  std::uint64_t uniform_int(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) %
           n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Box-Muller; consumes two uniforms per call, no cached spare.
  double normal(double mean, double stddev);

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent run seed from a base seed and a textual tag
/// (FNV-1a over the tag, finalized splitmix64-style).
std::uint64_t mix_seed(std::uint64_t base, std::string_view tag);

}  // namespace convoy
