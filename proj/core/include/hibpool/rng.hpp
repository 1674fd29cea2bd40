#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <initializer_list>
#include <random>

namespace hibpool {

using Rng = std::mt19937_64;

/// Derives an independent 64-bit seed from a base seed and a list of stream tags.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = base ^ 0x9e3779b97f4a7c15ULL;
  auto mix = [](std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  h = mix(h);
  for (auto t : tags) h = mix(h ^ (t + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
  return h;
}

// Stream tags.
enum class SeedStream : std::uint64_t {
  kFolds = 1,
  kInit = 2,
  kShuffle = 3,
  kSample = 4,
  kLouvain = 5,
  kRandomPool = 6,
  kPerturb = 7,
};

inline std::uint64_t tag(SeedStream s) { return static_cast<std::uint64_t>(s); }

/// Uniform index in [0, n); n must be positive.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return static_cast<std::size_t>(x % n);
}

/// Fisher-Yates shuffle with a portable index draw.
template <typename T>
void shuffle_in_place(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_index(rng, i)]);
  }
}

/// Box-Muller standard normal, so draws are identical across standard libraries.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    spare_ = radius * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return radius * std::cos(kTwoPi * u2);
  }

 private:
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  Rng rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hibpool
