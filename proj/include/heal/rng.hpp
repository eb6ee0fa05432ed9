#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace heal {

// Counter-based generator: output k of stream (key) is mix(key, k), so any
// draw can be reproduced without replaying earlier ones.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_key(std::uint64_t seed) { return mix64(seed); }

template <typename... Rest>
constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t next, Rest... rest) {
  return derive_key(mix64(seed) ^ mix64(next + 0x632be59bd9b4e019ULL), rest...);
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}
  template <typename... Ids>
  CounterRng(std::uint64_t seed, Ids... ids) : key_(derive_key(seed, static_cast<std::uint64_t>(ids)...)) {}

  std::uint64_t next_u64() { return mix64(key_ ^ mix64(counter_++)); }

  // 53 random bits mapped to [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t below(std::uint64_t n) {
    // Rejection keeps the draw unbiased.
    const std::uint64_t limit = n == 0 ? 0 : (~std::uint64_t{0} - (~std::uint64_t{0} % n));
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace heal
