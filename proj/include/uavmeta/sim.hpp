#pragma once

// Monte Carlo oracle: samples Poisson network realizations, reproduces the
// strongest-average-power association, the interferer beam geometry, and
// Nakagami fading, and estimates coverage, the empirical meta distribution,
// association fractions, and the truncated mean local delay.
//
// Reproducibility: every realization consumes its own counter-derived stream
// (master seed, realization index), and all aggregates are reduced in index
// order, so results are bit-identical for a fixed master seed regardless of
// worker count.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "uavmeta/channel.hpp"
#include "uavmeta/config.hpp"
#include "uavmeta/geometry.hpp"
#include "uavmeta/oba.hpp"
#include "uavmeta/rng.hpp"

namespace uavmeta {

/// Worker count: UAVMETA_THREADS caps it; defaults to the hardware count.
inline int default_threads() {
  if (const char* env = std::getenv("UAVMETA_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? int(hc) : 1;
}

/// Runs fn(i) for i in [0, n) over a static partition of worker threads.
template <class Fn>
void parallel_for(long n, int threads, Fn&& fn) {
  threads = std::max(1, threads);
  if (threads <= 1 || n < 2) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  auto worker = [&] {
    constexpr long kChunk = 16;
    for (;;) {
      const long base = next.fetch_add(kChunk);
      if (base >= n) return;
      const long end = std::min(n, base + kChunk);
      for (long i = base; i < end; ++i) fn(i);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// Network realizations
// ---------------------------------------------------------------------------

struct Realization {
  std::vector<std::array<double, 2>> tbs_xy;
  std::vector<std::array<double, 2>> uav_xy;
  std::vector<uint8_t> los;         // per-UAV LoS indicator
  std::vector<double> user_t;       // per-UAV horizontal distance to its user
  std::vector<double> user_alpha;   // per-UAV user azimuth offset in [0, pi)
  Tier serving_tier = Tier::tbs;
  double serving_distance = 0.0;    // 3D distance
  long serving_index = -1;          // index within its tier's vector
  bool empty = false;               // no transmitter in the region
  double region_radius = 0.0;
  uint64_t master_seed = 0;
  uint64_t index = 0;
};

inline double horizontal_norm(const std::array<double, 2>& p) {
  return std::hypot(p[0], p[1]);
}

/// Samples one network realization. The interfering UAVs' served-user
/// distances follow the analytical serving-distance mixture; their azimuths
/// are uniform on [0, pi).
inline Realization sample_network(const Analysis& an, double region_radius,
                                  uint64_t master_seed, uint64_t index) {
  const NetworkConfig& cfg = an.config();
  const Geometry& geom = an.geometry();
  Realization real;
  real.region_radius = region_radius;
  real.master_seed = master_seed;
  real.index = index;
  rng::Stream rs(master_seed, index);

  const double area = num::kPi * region_radius * region_radius;
  const long nb = rs.poisson(cfg.lambda_b * area);
  const long nu = rs.poisson(cfg.lambda_u * area);
  real.tbs_xy.reserve(nb);
  real.uav_xy.reserve(nu);
  real.los.reserve(nu);
  real.user_t.reserve(nu);
  real.user_alpha.reserve(nu);

  double best_b = -1.0, best_l = -1.0, best_n = -1.0;  // min 3D distances
  long idx_b = -1, idx_l = -1, idx_n = -1;
  for (long i = 0; i < nb; ++i) {
    const auto p = rs.disk_point(region_radius);
    real.tbs_xy.push_back(p);
    const double rho = horizontal_norm(p);
    const double d = std::sqrt(rho * rho + cfg.h_b * cfg.h_b);
    if (best_b < 0.0 || d < best_b) {
      best_b = d;
      idx_b = i;
    }
  }
  const bool has_mixture = geom.has_uav_mixture();
  for (long i = 0; i < nu; ++i) {
    const auto p = rs.disk_point(region_radius);
    real.uav_xy.push_back(p);
    const double rho = horizontal_norm(p);
    const double d = std::sqrt(rho * rho + cfg.h_u * cfg.h_u);
    const bool is_los = rs.uniform() < los_probability(cfg, d);
    real.los.push_back(is_los ? 1 : 0);
    double t = 0.0;
    if (has_mixture) {
      const double y = geom.mixture_quantile(rs.uniform());
      t = std::sqrt(std::max(y * y - cfg.h_u * cfg.h_u, 0.0));
    }
    real.user_t.push_back(t);
    real.user_alpha.push_back(rs.uniform(num::kPi));
    if (is_los) {
      if (best_l < 0.0 || d < best_l) {
        best_l = d;
        idx_l = i;
      }
    } else {
      if (best_n < 0.0 || d < best_n) {
        best_n = d;
        idx_n = i;
      }
    }
  }

  // strongest average power among per-tier nearest candidates; ties resolve
  // in tier order tbs, los, nlos
  double best_pow = -1.0;
  real.empty = true;
  auto consider = [&](Tier k, double dist, long idx) {
    if (idx < 0) return;
    const double p = serving_power(cfg, k, dist);
    if (p > best_pow) {
      best_pow = p;
      real.serving_tier = k;
      real.serving_distance = dist;
      real.serving_index = idx;
      real.empty = false;
    }
  };
  consider(Tier::tbs, best_b, idx_b);
  consider(Tier::los_uav, best_l, idx_l);
  consider(Tier::nlos_uav, best_n, idx_n);
  return real;
}

// ---------------------------------------------------------------------------
// CSP estimation
// ---------------------------------------------------------------------------

namespace detail_sim {

/// ln via bit decomposition and an atanh series (|t| <= 0.172, error below
/// 1e-9 relative); the fading hot loop burns one log per exponential draw.
inline double fast_log(double x) {
  uint64_t bits;
  static_assert(sizeof(bits) == sizeof(x));
  __builtin_memcpy(&bits, &x, sizeof(x));
  int e = int((bits >> 52) & 0x7FF) - 1023;
  bits = (bits & 0x000FFFFFFFFFFFFFULL) | 0x3FF0000000000000ULL;
  double m;
  __builtin_memcpy(&m, &bits, sizeof(m));
  if (m > 1.4142135623730951) {
    m *= 0.5;
    e += 1;
  }
  const double t = (m - 1.0) / (m + 1.0);
  const double t2 = t * t;
  const double lnm =
      2.0 * t *
      (1.0 + t2 * (1.0 / 3 + t2 * (1.0 / 5 + t2 * (1.0 / 7 + t2 * (1.0 / 9)))));
  return e * 0.6931471805599453 + lnm;
}

inline double fast_exponential(rng::Stream& rs) { return -fast_log(rs.uniform()); }

inline double fast_gamma_norm(rng::Stream& rs, int m) {
  double acc = 0.0;
  for (int i = 0; i < m; ++i) acc += fast_exponential(rs);
  return acc / m;
}

struct InterfererTable {
  std::vector<double> weight;  // average received power
  std::vector<int> shape;      // fading order
};

/// Average received powers of every non-serving transmitter, with the exact
/// per-UAV beam geometry (steerable: law-of-cosines angle from the sampled
/// (t, alpha); vertical: arctan(l / h_u)).
inline void build_interferers(const Realization& real, const Analysis& an,
                              InterfererTable& out, bool exclude_serving = true) {
  const NetworkConfig& cfg = an.config();
  out.weight.clear();
  out.shape.clear();
  const TierParams& tb = cfg.tier(Tier::tbs);
  for (size_t j = 0; j < real.tbs_xy.size(); ++j) {
    if (exclude_serving && real.serving_tier == Tier::tbs &&
        long(j) == real.serving_index)
      continue;
    const double rho = horizontal_norm(real.tbs_xy[j]);
    const double d = std::sqrt(rho * rho + cfg.h_b * cfg.h_b);
    const double g =
        antenna_gain(cfg.tbs_antenna, std::acos(std::min(cfg.h_b / d, 1.0)));
    out.weight.push_back(cfg.p_b * g * tb.kappa * std::pow(d, -tb.alpha));
    out.shape.push_back(tb.fading_m);
  }
  const double h2 = cfg.h_u * cfg.h_u;
  for (size_t j = 0; j < real.uav_xy.size(); ++j) {
    const Tier kt = real.los[j] ? Tier::los_uav : Tier::nlos_uav;
    if (exclude_serving && real.serving_tier == kt &&
        long(j) == real.serving_index)
      continue;
    const double l = horizontal_norm(real.uav_xy[j]);
    const double d = std::sqrt(l * l + h2);
    double g;
    if (cfg.mode == AntennaMode::steerable) {
      const double t = real.user_t[j];
      const double den = std::sqrt((h2 + l * l) * (h2 + t * t));
      const double c =
          std::clamp((h2 - l * t * std::cos(real.user_alpha[j])) / den, -1.0, 1.0);
      g = antenna_gain(cfg.uav_antenna, std::acos(c));
    } else {
      g = antenna_gain(cfg.uav_antenna, std::atan(l / cfg.h_u));
    }
    const TierParams& tp = cfg.tier(kt);
    out.weight.push_back(cfg.p_u * g * tp.kappa * std::pow(d, -tp.alpha));
    out.shape.push_back(tp.fading_m);
  }
}

}  // namespace detail_sim

struct CspEstimate {
  std::vector<double> per_gamma;  // success fraction per threshold
  bool empty_network = false;
};

/// Estimates the CSP of one realization for each threshold by drawing
/// n_fading independent fading vectors; the serving link and interferer set
/// are shared across thresholds.
inline CspEstimate estimate_csp_multi(const Realization& real,
                                      const Analysis& an,
                                      const std::vector<double>& gammas,
                                      long n_fading,
                                      uint64_t fading_salt = 0x5EEDFAD1u) {
  CspEstimate est;
  est.per_gamma.assign(gammas.size(), 0.0);
  if (real.empty) {
    est.empty_network = true;
    return est;
  }
  const NetworkConfig& cfg = an.config();
  detail_sim::InterfererTable tab;
  detail_sim::build_interferers(real, an, tab);
  const double l_serv = serving_power(cfg, real.serving_tier, real.serving_distance);
  const int m_serv = cfg.tier(real.serving_tier).fading_m;
  rng::Stream fs(real.master_seed ^ fading_salt, real.index);
  std::vector<long> hits(gammas.size(), 0);
  for (long d = 0; d < n_fading; ++d) {
    const double sig = l_serv * detail_sim::fast_gamma_norm(fs, m_serv);
    double interf = 0.0;
    for (size_t j = 0; j < tab.weight.size(); ++j)
      interf += tab.weight[j] * detail_sim::fast_gamma_norm(fs, tab.shape[j]);
    for (size_t gi = 0; gi < gammas.size(); ++gi)
      if (sig > gammas[gi] * (cfg.n0 + interf)) ++hits[gi];
  }
  for (size_t gi = 0; gi < gammas.size(); ++gi)
    est.per_gamma[gi] = double(hits[gi]) / double(n_fading);
  return est;
}

inline double estimate_csp(const Realization& real, const Analysis& an,
                           double gamma, long n_fading,
                           uint64_t fading_salt = 0x5EEDFAD1u) {
  return estimate_csp_multi(real, an, {gamma}, n_fading, fading_salt)
      .per_gamma[0];
}

// ---------------------------------------------------------------------------
// Estimators over many realizations
// ---------------------------------------------------------------------------

struct EmpiricalMD {
  double gamma = 0.0;
  std::vector<double> csp_samples;  // one CSP estimate per realization
  std::vector<double> xs;
  std::vector<double> values;  // empirical CCDF of the CSP
  long n_networks = 0;
  long n_fading = 0;
};

inline AssociationResult empirical_association(const Analysis& an,
                                               long n_networks, uint64_t seed,
                                               double region_radius = 2000.0,
                                               int threads = 0) {
  if (threads <= 0) threads = default_threads();
  std::vector<int8_t> tier_of(n_networks, -1);
  parallel_for(n_networks, threads, [&](long i) {
    const Realization real = sample_network(an, region_radius, seed, i);
    if (!real.empty) tier_of[i] = int8_t(tier_index(real.serving_tier));
  });
  AssociationResult out;
  out.mode = an.config().mode;
  long total = 0;
  for (long i = 0; i < n_networks; ++i) {
    if (tier_of[i] < 0) continue;
    out.a[tier_of[i]] += 1.0;
    ++total;
  }
  if (total > 0)
    for (double& v : out.a) v /= double(total);
  return out;
}

/// Mean CSP per threshold over n_networks x n_fading samples.
inline std::vector<double> empirical_coverage(const Analysis& an,
                                              const std::vector<double>& gammas,
                                              long n_networks, long n_fading,
                                              uint64_t seed,
                                              double region_radius = 2000.0,
                                              int threads = 0) {
  if (threads <= 0) threads = default_threads();
  std::vector<std::vector<double>> rows(n_networks);
  parallel_for(n_networks, threads, [&](long i) {
    const Realization real = sample_network(an, region_radius, seed, i);
    rows[i] = estimate_csp_multi(real, an, gammas, n_fading).per_gamma;
  });
  std::vector<double> mean(gammas.size(), 0.0);
  for (long i = 0; i < n_networks; ++i)
    for (size_t g = 0; g < gammas.size(); ++g) mean[g] += rows[i][g];
  for (double& v : mean) v /= double(n_networks);
  return mean;
}

inline EmpiricalMD empirical_md(const Analysis& an, double gamma,
                                std::vector<double> xs, long n_networks,
                                long n_fading, uint64_t seed,
                                double region_radius = 2000.0,
                                int threads = 0) {
  if (threads <= 0) threads = default_threads();
  EmpiricalMD md;
  md.gamma = gamma;
  md.n_networks = n_networks;
  md.n_fading = n_fading;
  md.xs = std::move(xs);
  md.csp_samples.assign(n_networks, 0.0);
  parallel_for(n_networks, threads, [&](long i) {
    const Realization real = sample_network(an, region_radius, seed, i);
    md.csp_samples[i] = estimate_csp(real, an, gamma, n_fading);
  });
  md.values.resize(md.xs.size());
  for (size_t j = 0; j < md.xs.size(); ++j) {
    long c = 0;
    for (double v : md.csp_samples)
      if (v >= md.xs[j]) ++c;
    md.values[j] = double(c) / double(n_networks);
  }
  return md;
}

struct EmpiricalDelay {
  double attempts = 0.0;
  double truncated_fraction = 0.0;  // share of realizations below the floor
};

/// Truncated mean local delay: mean of 1/CSP over realizations whose CSP
/// estimate clears the floor; the truncated share is reported so a phase
/// transition shows up as growing truncation.
inline EmpiricalDelay empirical_delay(const Analysis& an, double gamma,
                                      long n_networks, long n_fading,
                                      uint64_t seed, double csp_floor = 1e-3,
                                      double region_radius = 2000.0,
                                      int threads = 0) {
  if (threads <= 0) threads = default_threads();
  std::vector<double> csp(n_networks, 0.0);
  parallel_for(n_networks, threads, [&](long i) {
    const Realization real = sample_network(an, region_radius, seed, i);
    csp[i] = estimate_csp(real, an, gamma, n_fading);
  });
  EmpiricalDelay out;
  long kept = 0, cut = 0;
  double acc = 0.0;
  for (double v : csp) {
    if (v >= csp_floor) {
      acc += 1.0 / v;
      ++kept;
    } else {
      ++cut;
    }
  }
  out.attempts = kept > 0 ? acc / kept : std::numeric_limits<double>::infinity();
  out.truncated_fraction = double(cut) / double(n_networks);
  return out;
}

/// Primary-user oracle: a dedicated LoS UAV is pinned at the typical user's
/// zenith (serving link h_u at boresight); every sampled transmitter
/// interferes with no exclusion region.
inline std::vector<double> empirical_coverage_primary(
    const Analysis& an, const std::vector<double>& gammas, long n_networks,
    long n_fading, uint64_t seed, double region_radius = 2000.0,
    int threads = 0) {
  if (threads <= 0) threads = default_threads();
  const NetworkConfig& cfg = an.config();
  const TierParams& tl = cfg.tier(Tier::los_uav);
  const double l_serv = cfg.p_u * cfg.uav_antenna.max_gain * tl.kappa *
                        std::pow(cfg.h_u, -tl.alpha);
  std::vector<std::vector<double>> rows(n_networks);
  parallel_for(n_networks, threads, [&](long i) {
    Realization real = sample_network(an, region_radius, seed, i);
    detail_sim::InterfererTable tab;
    detail_sim::build_interferers(real, an, tab, /*exclude_serving=*/false);
    rng::Stream fs(seed ^ 0x9817ABCDu, i);
    std::vector<long> hits(gammas.size(), 0);
    for (long d = 0; d < n_fading; ++d) {
      const double sig = l_serv * detail_sim::fast_gamma_norm(fs, tl.fading_m);
      double interf = 0.0;
      for (size_t j = 0; j < tab.weight.size(); ++j)
        interf += tab.weight[j] * detail_sim::fast_gamma_norm(fs, tab.shape[j]);
      for (size_t gi = 0; gi < gammas.size(); ++gi)
        if (sig > gammas[gi] * (cfg.n0 + interf)) ++hits[gi];
    }
    rows[i].resize(gammas.size());
    for (size_t gi = 0; gi < gammas.size(); ++gi)
      rows[i][gi] = double(hits[gi]) / double(n_fading);
  });
  std::vector<double> mean(gammas.size(), 0.0);
  for (long i = 0; i < n_networks; ++i)
    for (size_t g = 0; g < gammas.size(); ++g) mean[g] += rows[i][g];
  for (double& v : mean) v /= double(n_networks);
  return mean;
}

}  // namespace uavmeta
