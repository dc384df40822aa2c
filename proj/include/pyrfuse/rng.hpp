#pragma once

#include <cstdint>
#include <random>

namespace pyrfuse {

/// Seeded uniform generator. The mapping from raw engine output to floats is
/// fixed here (24-bit mantissa scaling) so sequences do not depend on
/// libstdc++ distribution internals and stay reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed)
      : gen_(static_cast<std::mt19937::result_type>(seed)) {}

  std::uint32_t next_u32() { return gen_(); }

  /// Uniform in [0, 1).
  float uniform() { return static_cast<float>(next_u32() >> 8) * (1.0f / 16777216.0f); }

  /// Uniform in [lo, hi).
  float uniform(float lo, float hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint32_t below(std::uint32_t n) {
    return static_cast<std::uint32_t>((static_cast<std::uint64_t>(next_u32()) * n) >> 32);
  }

 private:
  std::mt19937 gen_;
};

}  // namespace pyrfuse
