#pragma once

#include <cstdint>
#include <string_view>

namespace stpuf {

// Counter-based randomness. Every random draw in the engine is a pure
// function of a key derived from the master seed plus the identity of the
// thing being drawn, so results never depend on evaluation order.

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

class StreamKey {
 public:
  constexpr StreamKey() = default;
  constexpr explicit StreamKey(std::uint64_t seed) : value_(seed) {}

  constexpr StreamKey derive(std::uint64_t component) const noexcept {
    return StreamKey(splitmix64(value_ ^ splitmix64(component)));
  }
  constexpr StreamKey derive(std::string_view tag) const noexcept {
    return derive(fnv1a64(tag));
  }

  constexpr std::uint64_t value() const noexcept { return value_; }

  // Raw 64 bits at position `counter` of this key's stream.
  constexpr std::uint64_t bits(std::uint64_t counter = 0) const noexcept {
    return splitmix64(value_ + splitmix64(counter ^ 0xD1B54A32D192ED03ULL));
  }

  // Uniform on the open interval (0, 1).
  double uniform(std::uint64_t counter = 0) const noexcept;
  // Standard normal via inverse CDF of uniform(counter).
  double normal(std::uint64_t counter = 0) const;
  bool coin(std::uint64_t counter = 0) const noexcept { return (bits(counter) >> 63) != 0; }

 private:
  std::uint64_t value_ = 0;
};

// Inverse of the standard normal CDF, p in (0, 1).
double normal_quantile(double p);

// Standard normal CDF.
double normal_cdf(double x);

}  // namespace stpuf
