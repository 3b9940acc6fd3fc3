#pragma once

// Random streams for Monte Carlo paths.
//
// Every path draws from its own xoshiro256** stream. The stream for path `i`
// of a study with master seed `s` is seeded by running SplitMix64 from
// mix(s, i), so a path's randomness depends only on (s, i) and never on the
// order in which paths are scheduled. All variates below are generated by
// hand-written transforms so the sequences are identical across standard
// library implementations.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <utility>

namespace roughhawkes {

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// xoshiro256** 1.0 (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Rng(std::uint64_t seed) noexcept {
    SplitMix64 sm(seed);
    for (auto& w : s_) w = sm.next();
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
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

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1]; safe to take the logarithm of.
  double uniform_pos() noexcept { return 1.0 - uniform(); }

  double exponential(double rate) noexcept {
    return -std::log(uniform_pos()) / rate;
  }

  /// Poisson variate by sequential inversion. Large means are split into
  /// chunks of at most 16 so that exp(-mean) never underflows.
  std::uint64_t poisson(double mean) noexcept {
    std::uint64_t total = 0;
    while (mean > 16.0) {
      total += poisson_small(16.0);
      mean -= 16.0;
    }
    return total + poisson_small(mean);
  }

  /// Fills `out` with independent standard normals (Box-Muller, pairs).
  void fill_normal(std::span<double> out) noexcept {
    std::size_t i = 0;
    for (; i + 1 < out.size(); i += 2) {
      const auto [a, b] = normal_pair();
      out[i] = a;
      out[i + 1] = b;
    }
    if (i < out.size()) out[i] = normal_pair().first;
  }

  std::pair<double, double> normal_pair() noexcept {
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    return {r * std::cos(theta), r * std::sin(theta)};
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t poisson_small(double mean) noexcept {
    if (mean <= 0.0) return 0;
    const double u = uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    while (u >= cdf) {
      ++k;
      p *= mean / static_cast<double>(k);
      const double next = cdf + p;
      if (next == cdf) break;  // u sits in the rounding gap of the far tail
      cdf = next;
    }
    return k;
  }

  std::array<std::uint64_t, 4> s_{};
};

/// Seed of the substream owned by path `index` under `master_seed`.
constexpr std::uint64_t path_seed(std::uint64_t master_seed,
                                  std::uint64_t index) noexcept {
  SplitMix64 a(master_seed);
  const std::uint64_t base = a.next();
  SplitMix64 b(base ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
  return b.next();
}

inline Rng path_rng(std::uint64_t master_seed, std::uint64_t index) noexcept {
  return Rng(path_seed(master_seed, index));
}

}  // namespace roughhawkes
