#pragma once

// Random number generation with reproducible parallel streams.
//
// Rng is xoshiro256** seeded through splitmix64. Stream k of a seed is the
// seeded generator advanced by k jumps of 2^128 steps, so streams never
// overlap in practice and can be drawn from concurrently.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

namespace smcmix {

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);
  /// Independent stream `stream` of `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Advances the state by 2^128 draws.
  void jump();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  /// Standard normal (Marsaglia polar method).
  double normal();
  /// Gamma(shape, rate), Marsaglia-Tsang with the shape < 1 boost.
  double gamma(double shape, double rate);
  /// Index drawn with the given (not necessarily normalized) weights.
  std::size_t categorical(std::span<const double> weights);

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace smcmix
