#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace dgn {

// Deterministic RNG used everywhere randomness is needed. The generator is
// SplitMix64, chosen because the whole algorithm fits in a dozen lines and can
// be reproduced bit-exactly in any language:
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   output = z ^ (z >> 31)
//
// Derived conversions (also part of the reproducibility contract):
//   uniform01:  (next_u64() >> 11) * 2^-53, in [0, 1)
//   bernoulli:  uniform01() < p
//   gaussian:   Box-Muller on (1 - uniform01(), uniform01()); the cosine
//               branch is returned first, the sine branch is cached
//   below(n):   128-bit multiply-shift (Lemire), (next_u64() * n) >> 64
//
// Sub-streams are derived from (seed, index) so that per-sample or per-trial
// work can run in any order and still reproduce serial results.

inline constexpr std::uint64_t kSplitMix64Gamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kSplitMix64Gamma;
    return mix64(state_);
  }

  // [0, 1)
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  // Uniform integer in [0, n). Multiply-shift keeps the mapping documented
  // and platform independent.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Fisher-Yates, descending index, swap with below(i + 1).
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stream derivation: independent sub-stream for (seed, index).
inline Rng derive_stream(std::uint64_t seed, std::uint64_t index) {
  return Rng(mix64(seed ^ mix64(index ^ 0x5851F42D4C957F2DULL)));
}

}  // namespace dgn
