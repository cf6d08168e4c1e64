#pragma once

#include <cstdint>

namespace elfarol {

// splitmix64: tiny counter-based generator. Used instead of <random> engines so
// that traces are bit-identical across standard library implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Unbiased-enough bounded draw (Lemire multiply-shift).
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

// Stable stream derivation: mix(seed, k) seeds an independent-looking stream
// per key, so adding agents does not perturb the streams of existing ones.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) {
  SplitMix64 g(seed ^ (0x9E3779B97F4A7C15ULL * (key + 1)));
  return g.next();
}

}  // namespace elfarol
