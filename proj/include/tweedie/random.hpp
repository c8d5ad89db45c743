#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace tweedie {

/// Hashes (master seed, purpose label, indices) into a 64-bit stream key.
/// Every random stream in the library is keyed this way, so a stream's
/// contents never depend on the order in which other streams are consumed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::initializer_list<std::uint64_t> ids = {});

/// xoshiro256** seeded through splitmix64. Satisfies
/// UniformRandomBitGenerator, but the helpers below are preferred over
/// <random> distributions because their output is identical on every
/// standard library.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t key);

  static Stream derive(std::uint64_t master, std::string_view label,
                       std::initializer_list<std::uint64_t> ids = {}) {
    return Stream(derive_seed(master, label, ids));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  bool bernoulli(double prob) { return uniform() < prob; }
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::array<std::uint64_t, 4> state_;
};

}  // namespace tweedie
