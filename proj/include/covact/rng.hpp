// Seedable deterministic RNG with named substreams.
//
// Every randomized quantity in the library draws from its own substream so
// that, e.g., changing the antenna count never perturbs device positions.
// Substream seeds are derived with a splitmix64 hash of (seed, tag); the same
// hash derives per-trial seeds from a master seed, so adding trials never
// reshuffles earlier ones.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace covact {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Stable seed derivation: stream `tag` of generator `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag));
}

enum class Stream : std::uint64_t {
  Positions = 1,
  Signatures = 2,
  Activity = 3,
  Channels = 4,
  Noise = 5,
  Permutations = 6,
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  Rng substream(Stream tag) const {
    return Rng(derive_seed(seed_, static_cast<std::uint64_t>(tag)));
  }

  std::uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1) with 53 random bits
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // unbiased integer in [0, n) by rejection
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // circularly-symmetric complex Gaussian, zero mean, unit variance
  // (re and im each N(0, 1/2); one Box-Muller pair per call)
  std::complex<double> cgaussian() {
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1));  // sqrt(-2 ln u1) / sqrt(2)
    const double t = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(t), r * std::sin(t)};
  }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = uniform_below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace covact
