#pragma once

#include <cstdint>

namespace sandfire {

// SplitMix64 (Steele, Lea & Flood 2014; public-domain reference code by Vigna).
// The generator is pinned to this exact algorithm so that seeded runs replay
// bit-identically on every platform, which the standard <random> distributions
// do not guarantee.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform draw from [0, n). Rejection sampling; free of modulo bias.
  constexpr std::uint64_t bounded(std::uint64_t n) {
    // (0 - n) % n == 2^64 mod n
    const std::uint64_t reject_below = (0 - n) % n;
    std::uint64_t v = next();
    while (v < reject_below) v = next();
    return v % n;
  }

  // Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  constexpr std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// 64-bit FNV-1a, used for content digests and lattice checksums.
inline constexpr std::uint64_t kFnv1aOffset = 1469598103934665603ULL;
inline constexpr std::uint64_t kFnv1aPrime = 1099511628211ULL;

constexpr std::uint64_t fnv1a_byte(std::uint64_t h, unsigned char b) {
  return (h ^ static_cast<std::uint64_t>(b)) * kFnv1aPrime;
}

constexpr std::uint64_t fnv1a_u64(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h = fnv1a_byte(h, static_cast<unsigned char>((v >> (i * 8)) & 0xFFu));
  }
  return h;
}

template <typename It>
constexpr std::uint64_t fnv1a_bytes(std::uint64_t h, It first, It last) {
  for (; first != last; ++first) h = fnv1a_byte(h, static_cast<unsigned char>(*first));
  return h;
}

}  // namespace sandfire
