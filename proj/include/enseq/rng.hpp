#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace enseq::rng {

/// splitmix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Counter-based keyed hash stream. Every random quantity in the toy models
/// is a pure function of the words fed into its key, so evaluation order and
/// thread count cannot affect results.
class Key {
 public:
  constexpr Key() = default;
  constexpr explicit Key(std::uint64_t state) : state_(state) {}

  [[nodiscard]] constexpr Key with(std::uint64_t word) const {
    return Key(mix64(state_ ^ (word + 0x9e3779b97f4a7c15ull)));
  }

  constexpr std::uint64_t bits() const { return mix64(state_); }

 private:
  std::uint64_t state_ = 0x243f6a8885a308d3ull;
};

/// Uniform double in [0, 1).
inline double u01(const Key& key) {
  return static_cast<double>(key.bits() >> 11) * 0x1.0p-53;
}

/// Uniform double in (0, 1]; safe as a log argument.
inline double u01_positive(const Key& key) {
  return static_cast<double>((key.bits() >> 11) + 1) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two derived sub-streams.
inline double normal(const Key& key) {
  const double u1 = u01_positive(key.with(0));
  const double u2 = u01(key.with(1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Uniform integer in [0, n). Modulo bias is ~n/2^64 and irrelevant here.
inline std::uint64_t uniform_index(const Key& key, std::uint64_t n) {
  return key.bits() % n;
}

}  // namespace enseq::rng
