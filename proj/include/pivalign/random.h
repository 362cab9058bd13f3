#ifndef PIVALIGN_RANDOM_H_
#define PIVALIGN_RANDOM_H_

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace pivalign {

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// xorshift64* generator. Output sequences are fixed by the seed alone, so
// shuffles and resamples replicate across platforms and implementations.
class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed) : state_(SplitMix64(seed)) {
    if (state_ == 0) state_ = 0x9e3779b97f4a7c15ULL;
  }

  std::uint64_t Next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545f4914f6cdd1dULL;
  }

  // Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t Below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do {
      r = Next();
    } while (r >= limit);
    return r % bound;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  bool Coin() { return (Next() >> 63) != 0; }

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(Below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// 64-bit FNV-1a.
inline std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed for a named pipeline stage: SplitMix64(seed ^ FNV-1a(stage)).
inline std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view stage) {
  return SplitMix64(seed ^ Fnv1a(stage));
}

}  // namespace pivalign

#endif  // PIVALIGN_RANDOM_H_
