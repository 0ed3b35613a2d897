#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

namespace srba {

/// SplitMix64; used for seeding and for mixing (seed, t, k) tuples.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t s) : state(s) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

/// xoshiro256**. The integer output stream is a pure function of the seed,
/// independent of platform and standard library.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& w : s_) w = sm.next();
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Unbiased draw in [0, bound) by rejection.
  std::uint64_t bounded(std::uint64_t bound) {
    const std::uint64_t threshold = (-bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (no cached spare, so the draw count per
  /// call is fixed).
  double normal() {
    const double u1 =
        (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_;
};

/// Indices drawn for one inner step: batch-many inner indices and batch-many
/// outer indices, each without replacement within the batch.
struct DrawnIndices {
  std::vector<int> is;
  std::vector<int> js;
};

/// Deterministic index sampler. The draw for a given (seed, t, k) is a pure
/// function of those three values; this is part of the reproducibility
/// contract and lets verification code replay any step of a run.
class IndexStream {
 public:
  explicit IndexStream(std::uint64_t seed) : seed_(seed) {}

  Xoshiro256 generator_at(int t, int k) const {
    SplitMix64 sm(seed_);
    std::uint64_t h = sm.next();
    h ^= 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(t) + 1);
    h = SplitMix64(h).next();
    h ^= 0xbf58476d1ce4e5b9ULL * (static_cast<std::uint64_t>(k) + 1);
    return Xoshiro256(SplitMix64(h).next());
  }

  DrawnIndices draw(int t, int k, int n, int m, int batch) const {
    Xoshiro256 gen = generator_at(t, k);
    DrawnIndices d;
    d.is = sample_without_replacement(gen, n, std::min(batch, n));
    d.js = sample_without_replacement(gen, m, std::min(batch, m));
    return d;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  // Partial Fisher-Yates; count == 1 reduces to a single bounded draw.
  static std::vector<int> sample_without_replacement(Xoshiro256& gen, int range,
                                                     int count) {
    if (count == 1) return {static_cast<int>(gen.bounded(range))};
    std::vector<int> pool(range);
    std::iota(pool.begin(), pool.end(), 0);
    for (int s = 0; s < count; ++s) {
      const int r = s + static_cast<int>(gen.bounded(range - s));
      std::swap(pool[s], pool[r]);
    }
    pool.resize(count);
    return pool;
  }

  std::uint64_t seed_;
};

}  // namespace srba
