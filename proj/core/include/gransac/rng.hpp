#pragma once

#include <cmath>
#include <cstdint>

namespace gransac {

// xoshiro256++ with splitmix64 seeding. Hand-rolled so that every stream is
// bit-reproducible across platforms and standard library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) {
    std::uint64_t x = seed;
    for (auto& si : s_) si = splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n).
  int uniform_int(int n) {
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<int>(x % un);
  }

  // Standard normal via Box-Muller (one value per call, no cached state).
  double normal() {
    double u1 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // Standard Gumbel(0,1); u is clamped away from {0,1} before the double log.
  double gumbel() {
    double u = uniform();
    if (u < 1e-12) u = 1e-12;
    if (u > 1.0 - 1e-12) u = 1.0 - 1e-12;
    return -std::log(-std::log(u));
  }

  // Deterministic child stream. Used to give every (item, hypothesis) pair
  // its own generator so parallel schedules cannot change results.
  Rng derive(std::uint64_t stream) const {
    std::uint64_t x = s_[0] ^ (0x9e3779b97f4a7c15ULL + stream * 0xbf58476d1ce4e5b9ULL);
    return Rng(x ^ (s_[2] + stream));
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t s_[4];
};

}  // namespace gransac
