#pragma once

#include <cmath>
#include <cstdint>

namespace socialpower {

// Counter-friendly splitmix64 generator. Streams derived from
// (seed, a, b) are independent for distinct (a, b), so work units can be
// assigned per stream and executed in any order with identical results.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Standard exponential via inversion; finite for every draw.
  double exponential() { return -std::log1p(-uniform01()); }

 private:
  std::uint64_t state_;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

inline SplitMix64 derive_stream(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b = 0) {
  std::uint64_t s = detail::mix64(seed + 0x9e3779b97f4a7c15ULL);
  s = detail::mix64(s ^ (a + 0xbf58476d1ce4e5b9ULL));
  s = detail::mix64(s ^ (b + 0x94d049bb133111ebULL));
  return SplitMix64(s);
}

}  // namespace socialpower
