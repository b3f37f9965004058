#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace logdrift {

/// xoshiro256** seeded through splitmix64. All derived draws (uniform reals,
/// bounded integers) are computed here rather than through <random>
/// distributions, whose output is implementation-defined, so simulations are
/// bit-reproducible across compilers and platforms.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();

  /// Uniform on {0, ..., n-1}; n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

 private:
  std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace logdrift
