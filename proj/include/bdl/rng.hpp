#pragma once

#include <cstdint>
#include <vector>

// Deterministic, platform-stable randomness. std::mt19937 is portable but
// the standard distributions are not; everything seeded here must reproduce
// byte-identically across compilers, so we keep our own primitives.

namespace bdl {

class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform-enough in [0, n); modulo bias is irrelevant at our scales.
  uint64_t below(uint64_t n) { return n == 0 ? 0 : next() % n; }

  int64_t range(int64_t lo, int64_t hi) {  // inclusive
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
  }

  bool chance(uint32_t percent) { return below(100) < percent; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
};

inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  SplitMix64 rng(a ^ (0x9e3779b97f4a7c15ull + (b << 6) + (b >> 2)));
  rng.next();
  return rng.next() ^ b;
}

}  // namespace bdl
