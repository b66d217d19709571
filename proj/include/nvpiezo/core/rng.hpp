#pragma once

// Counter-based random source. Each draw is a pure function of
// (seed, stream, counter), so thermal fields for cell k at step n can be
// produced in any order, on any thread, and still be bit-identical.

#include <cmath>
#include <cstdint>
#include <limits>

#include "nvpiezo/core/constants.hpp"

namespace nvpiezo {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Named streams so unrelated consumers never share draws.
enum class Stream : std::uint64_t {
  thermal = 1,
  initial_state = 2,
  shot_noise = 3,
  synthetic = 4,
};

class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(detail::splitmix64(seed ^ detail::splitmix64(stream + 0x632BE59BD9B4E019ULL))) {}
  constexpr CounterRng(std::uint64_t seed, Stream stream) noexcept
      : CounterRng(seed, static_cast<std::uint64_t>(stream)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  /// Raw 64-bit value at an absolute counter position.
  constexpr std::uint64_t at(std::uint64_t counter) const noexcept {
    return detail::splitmix64(key_ ^ detail::splitmix64(counter));
  }

  /// Uniform in the open interval (0, 1).
  double uniform_at(std::uint64_t counter) const noexcept {
    return (static_cast<double>(at(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal at an absolute index (Box-Muller over a counter pair).
  double gaussian_at(std::uint64_t index) const noexcept {
    const std::uint64_t pair = index >> 1;
    const double u1 = uniform_at(2 * pair);
    const double u2 = uniform_at(2 * pair + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = constants::two_pi * u2;
    return (index & 1U) ? r * std::sin(phi) : r * std::cos(phi);
  }

  result_type operator()() noexcept { return at(counter_++); }
  double uniform() noexcept { return uniform_at(counter_++); }
  double gaussian() noexcept { return gaussian_at(gauss_counter_++); }

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  // gaussian draws live in their own half of the counter space
  std::uint64_t gauss_counter_ = std::uint64_t{1} << 62;
};

}  // namespace nvpiezo
