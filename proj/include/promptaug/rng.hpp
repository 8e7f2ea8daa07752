#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

#include "promptaug/error.hpp"

namespace promptaug {

// SplitMix64 (Steele, Lea, Flood 2014). Chosen because it is tiny, has no
// platform-dependent state, and is trivially splittable by seeding children
// from its own output. Reference vector for seed 0:
//   0xe220a8397b1dcdaf, 0x6e789e6aa1b965f4, 0x06c45d188009454f
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform integer in [0, bound) by rejection; identical on every platform,
  // unlike std::uniform_int_distribution.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw Error(ErrorCode::kInvalidArgument, "below(0)");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  SplitMix64 split() { return SplitMix64(next()); }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Folds each part into the running state: h = mix(h + golden ^ part).
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = SplitMix64::mix(base);
  for (std::uint64_t p : parts) {
    h = SplitMix64::mix((h + 0x9e3779b97f4a7c15ULL) ^ p);
  }
  return h;
}

}  // namespace promptaug
