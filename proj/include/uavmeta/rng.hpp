#pragma once

// Reproducible random number streams for the Monte Carlo engine.
//
// Each network realization draws from its own xoshiro256++ stream whose state
// is derived from (master seed, realization index) through splitmix64, so
// estimates are independent of thread scheduling and worker count.

#include <array>
#include <cmath>
#include <cstdint>

#include "uavmeta/numerics.hpp"

namespace uavmeta::rng {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Stream {
 public:
  /// Stream for one realization: state derived from (master_seed, index).
  Stream(uint64_t master_seed, uint64_t index) {
    uint64_t sm = master_seed ^ (0x9E3779B97F4A7C15ULL * (index + 1));
    for (auto& word : s_) word = splitmix64(sm);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on (0, 1): 53-bit mantissa, zero excluded.
  double uniform() {
    const double u = (next_u64() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
  }

  /// Uniform on [0, hi).
  double uniform(double hi) { return (next_u64() >> 11) * 0x1.0p-53 * hi; }

  double exponential() { return -std::log(uniform()); }

  /// Normalized Gamma(m, 1/m) (unit mean) for integer shape m >= 1.
  double gamma_norm(int m) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) acc += exponential();
    return acc / m;
  }

  /// Poisson(mean): chop-down inversion for small means, Hoermann's PTRS
  /// transformed rejection for large ones. Both paths consume only this
  /// stream's uniforms.
  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
      const double l = std::exp(-mean);
      long k = 0;
      double p = 1.0;
      do {
        ++k;
        p *= uniform();
      } while (p > l);
      return k - 1;
    }
    return poisson_ptrs(mean);
  }

  /// Uniform point in a disk of radius region (centered at origin).
  std::array<double, 2> disk_point(double region) {
    const double r = region * std::sqrt(uniform());
    const double phi = uniform(2.0 * num::kPi);
    return {r * std::cos(phi), r * std::sin(phi)};
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  long poisson_ptrs(double mu) {
    const double smu = std::sqrt(mu);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::fabs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + mu + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
      const double rhs = -mu + kf * std::log(mu) - num::ln_gamma(kf + 1.0);
      if (lhs <= rhs) return static_cast<long>(kf);
    }
  }

  std::array<uint64_t, 4> s_;
};

}  // namespace uavmeta::rng
