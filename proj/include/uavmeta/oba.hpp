#pragma once

// Off-boresight-angle (OBA) analysis for interfering UAVs with steerable
// antennas: the exact conditional distribution given the horizontal distances
// to the typical user (l) and to the interferer's own served user (t), the
// deconditioned distribution over the serving-distance mixture, the mean
// interfering antenna gain, and the uniform-OBA baseline.
//
// The angle given (l, t) satisfies
//   cos Theta = (h^2 - l t cos a) / sqrt((h^2+l^2)(h^2+t^2)),  a ~ U(0, pi),
// which yields a density with inverse-square-root endpoint singularities in
// cos Theta. Quadratures therefore run either over the uniform angle a
// (regular integrand, the default) or over Gauss-Chebyshev nodes in
// cos Theta (the cross-check oracle).

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "uavmeta/channel.hpp"
#include "uavmeta/config.hpp"
#include "uavmeta/geometry.hpp"
#include "uavmeta/numerics.hpp"

namespace uavmeta {

struct ObaSupport {
  double theta_min = 0.0;
  double theta_max = 0.0;
  bool degenerate = false;  // t = 0 or l = 0: the angle is deterministic
};

inline ObaSupport oba_bounds(double h_u, double l, double t) {
  if (!(h_u > 0.0)) throw std::domain_error("oba_bounds requires h_u > 0");
  if (l < 0.0 || t < 0.0) throw std::domain_error("oba_bounds requires l, t >= 0");
  const double h2 = h_u * h_u;
  const double d = std::sqrt((h2 + l * l) * (h2 + t * t));
  ObaSupport s;
  if (l * t == 0.0) {
    const double th = std::atan(std::max(l, t) / h_u);
    s.theta_min = s.theta_max = th;
    s.degenerate = true;
    return s;
  }
  s.theta_min = std::acos(std::clamp((h2 + l * t) / d, -1.0, 1.0));
  s.theta_max = std::acos(std::clamp((h2 - l * t) / d, -1.0, 1.0));
  return s;
}

/// Lemma-3 CDF of the OBA given (l, t) in the steerable scenario.
inline double oba_cdf_given_lt(double h_u, double l, double t, double theta) {
  const ObaSupport s = oba_bounds(h_u, l, t);
  if (s.degenerate) return theta >= s.theta_min ? 1.0 : 0.0;
  if (theta <= s.theta_min) return 0.0;
  if (theta >= s.theta_max) return 1.0;
  const double h2 = h_u * h_u;
  const double d = std::sqrt((h2 + l * l) * (h2 + t * t));
  const double arg = std::clamp((h2 - d * std::cos(theta)) / (l * t), -1.0, 1.0);
  return 1.0 - std::acos(arg) / num::kPi;
}

/// Lemma-3 PDF (0 outside the support; integrable endpoint singularities).
inline double oba_pdf_given_lt(double h_u, double l, double t, double theta) {
  const ObaSupport s = oba_bounds(h_u, l, t);
  if (s.degenerate) return 0.0;
  if (theta <= s.theta_min || theta >= s.theta_max) return 0.0;
  const double c = std::cos(theta);
  const double prod =
      (std::cos(s.theta_min) - c) * (c - std::cos(s.theta_max));
  if (!(prod > 0.0)) return 0.0;
  return std::sin(theta) / (num::kPi * std::sqrt(prod));
}

// ---------------------------------------------------------------------------
// Mean gain given (l, t): two independent quadrature routes
// ---------------------------------------------------------------------------

namespace detail {

/// cos Theta as a function of the uniform angle a.
inline double cos_theta_of_alpha(double h2, double d, double lt, double a) {
  return std::clamp((h2 - lt * std::cos(a)) / d, -1.0, 1.0);
}

}  // namespace detail

/// E[G_u(Theta) | l, t] via the uniform-angle form (default route).
inline double mean_gain_given_lt(const AntennaPattern& pat, double h_u,
                                 double l, double t,
                                 double rel_tol = 1e-9) {
  const ObaSupport s = oba_bounds(h_u, l, t);
  if (s.degenerate) return antenna_gain(pat, s.theta_min);
  const double h2 = h_u * h_u;
  const double d = std::sqrt((h2 + l * l) * (h2 + t * t));
  const double lt = l * t;
  auto f = [&](double a) {
    return antenna_gain(pat,
                        std::acos(detail::cos_theta_of_alpha(h2, d, lt, a)));
  };
  num::QuadratureSpec spec;
  spec.rel_tol = rel_tol;
  spec.abs_tol = 1e-13;
  // split at the sidelobe kink when the pattern crosses it inside the support
  const double th_c = sidelobe_angle(pat);
  double a_split = -1.0;
  if (th_c > s.theta_min && th_c < s.theta_max) {
    const double ca = (h2 - d * std::cos(th_c)) / lt;
    if (ca > -1.0 && ca < 1.0) a_split = std::acos(ca);
  }
  double acc = 0.0;
  if (a_split > 0.0 && a_split < num::kPi) {
    acc += num::integrate_adaptive(f, 0.0, a_split, spec).value;
    acc += num::integrate_adaptive(f, a_split, num::kPi, spec).value;
  } else {
    acc = num::integrate_adaptive(f, 0.0, num::kPi, spec).value;
  }
  return acc / num::kPi;
}

/// E[G_u(Theta) | l, t] via Gauss-Chebyshev nodes in cos Theta (the test
/// oracle for the endpoint-singular Lemma-3 density).
inline double mean_gain_given_lt_chebyshev(const AntennaPattern& pat,
                                           double h_u, double l, double t,
                                           int n = 4096) {
  const ObaSupport s = oba_bounds(h_u, l, t);
  if (s.degenerate) return antenna_gain(pat, s.theta_min);
  const double c_lo = std::cos(s.theta_max);
  const double c_hi = std::cos(s.theta_min);
  auto g = [&](double c) { return antenna_gain(pat, std::acos(std::clamp(c, -1.0, 1.0))); };
  // split at the sidelobe kink for clean convergence
  const double th_c = sidelobe_angle(pat);
  const double c_kink = std::cos(std::min(th_c, num::kPi));
  if (c_kink > c_lo && c_kink < c_hi) {
    // Chebyshev weight is w.r.t. the full interval; handle the kink by
    // integrating the two pieces of the weight integral separately through a
    // change of variables c = mid + half*cos(phi).
    const double mid = 0.5 * (c_hi + c_lo), half = 0.5 * (c_hi - c_lo);
    const double phi_k = std::acos(std::clamp((c_kink - mid) / half, -1.0, 1.0));
    const num::GaussNodes& gl = num::gauss_legendre(n >= 512 ? 128 : 32);
    double acc = 0.0;
    for (const auto& [a, b] : {std::pair{0.0, phi_k}, std::pair{phi_k, num::kPi}}) {
      const double pm = 0.5 * (a + b), ph = 0.5 * (b - a);
      for (size_t i = 0; i < gl.x.size(); ++i) {
        const double phi = pm + ph * gl.x[i];
        acc += ph * gl.w[i] * g(mid + half * std::cos(phi));
      }
    }
    return acc / num::kPi;
  }
  return num::gauss_chebyshev_mean(g, c_lo, c_hi, n);
}

// ---------------------------------------------------------------------------
// Deconditioned OBA distribution (Lemma 4)
// ---------------------------------------------------------------------------

/// CDF of the OBA given only the horizontal distance l, steerable scenario:
/// the Lemma-3 CDF mixed over the interfering UAV's own serving distance.
inline double oba_cdf_given_l(const Geometry& geom, double l, double theta) {
  const double h = geom.config().h_u;
  const auto& ys = geom.mixture_nodes();
  const auto& ws = geom.mixture_weights();
  double acc = 0.0;
  for (size_t i = 0; i < ys.size(); ++i) {
    const double t = std::sqrt(std::max(ys[i] * ys[i] - h * h, 0.0));
    acc += ws[i] * oba_cdf_given_lt(h, l, t, theta);
  }
  return std::clamp(acc, 0.0, 1.0);
}

/// PDF of the OBA given l (Lemma 4). The y-integrand carries inverse-sqrt
/// singularities where theta touches the (l, t(y)) support boundary; each
/// positivity interval is integrated under the substitution
/// y = mid - half*cos(phi) which regularizes both endpoints.
inline double oba_pdf_given_l(const Geometry& geom, double l, double theta) {
  const NetworkConfig& cfg = geom.config();
  if (!geom.has_uav_mixture())
    throw std::domain_error("oba_pdf_given_l undefined: a_b = 1");
  const double h = cfg.h_u;
  const double h2 = h * h;
  if (theta <= 0.0 || theta >= num::kPi) return 0.0;
  if (l == 0.0) return 0.0;  // degenerate: point mass at arctan(t/h)

  // Support boundaries in t: cos(theta)^2 (h^2+l^2)(h^2+t^2) = (h^2 +- l t)^2.
  const double c = std::cos(theta);
  const double c2a = c * c * (h2 + l * l);
  std::vector<double> cuts;
  const double qa = c2a - l * l;
  for (double sign : {+1.0, -1.0}) {
    // qa * t^2 - sign*2 h^2 l t + h^2 (c2a - h^2) = 0
    const double qb = -sign * 2.0 * h2 * l;
    const double qc = h2 * (c2a - h2);
    if (std::fabs(qa) < 1e-300) {
      if (std::fabs(qb) > 0.0) {
        const double t = -qc / qb;
        if (t > 0.0) cuts.push_back(t);
      }
      continue;
    }
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) continue;
    const double sq = std::sqrt(disc);
    for (double t : {(-qb + sq) / (2.0 * qa), (-qb - sq) / (2.0 * qa)})
      if (t > 0.0) cuts.push_back(t);
  }
  const double y_end = geom.mixture_nodes().back();
  std::vector<double> edges{cfg.h_u};
  for (double t : cuts) {
    const double y = std::sqrt(t * t + h2);
    if (y > cfg.h_u && y < y_end) edges.push_back(y);
  }
  edges.push_back(y_end);
  std::sort(edges.begin(), edges.end());

  num::QuadratureSpec spec;
  spec.abs_tol = 1e-11;
  spec.rel_tol = 1e-9;
  double acc = 0.0;
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i], b = edges[i + 1];
    if (!(b > a * (1.0 + 1e-14))) continue;
    const double y_mid = 0.5 * (a + b);
    const double t_mid = std::sqrt(std::max(y_mid * y_mid - h2, 0.0));
    if (oba_pdf_given_lt(h, l, t_mid, theta) <= 0.0) continue;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    auto f = [&](double phi) {
      const double y = mid - half * std::cos(phi);
      const double t = std::sqrt(std::max(y * y - h2, 0.0));
      return geom.mixture_pdf(y) * oba_pdf_given_lt(h, l, t, theta) * half *
             std::sin(phi);
    };
    acc += num::integrate_adaptive(f, 0.0, num::kPi, spec).value;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Mean interfering gain (Corollary 2) and the cached profile
// ---------------------------------------------------------------------------

enum class GainQuadrature { alpha_form, chebyshev };

/// Mean antenna gain of an interfering UAV at 3D distance r, per the
/// configured mode/treatment: steerable averages over the exact OBA law,
/// vertical is deterministic, the uniform baseline is a constant.
inline double mean_interfering_gain(const Geometry& geom, double r,
                                    GainQuadrature q = GainQuadrature::alpha_form) {
  const NetworkConfig& cfg = geom.config();
  if (!(r >= cfg.h_u))
    throw std::domain_error("mean_interfering_gain requires r >= h_u");
  const AntennaPattern& pat = cfg.uav_antenna;
  if (cfg.oba == ObaTreatment::uniform_baseline) {
    auto f = [&](double th) { return antenna_gain(pat, th); };
    num::QuadratureSpec spec;
    spec.rel_tol = 1e-10;
    return num::integrate_adaptive(f, 0.0, num::kPi, spec).value / num::kPi;
  }
  if (cfg.mode == AntennaMode::vertical)
    return antenna_gain(pat, std::acos(std::min(cfg.h_u / r, 1.0)));
  const double l = std::sqrt(std::max(r * r - cfg.h_u * cfg.h_u, 0.0));
  const auto& ys = geom.mixture_nodes();
  const auto& ws = geom.mixture_weights();
  double acc = 0.0;
  for (size_t i = 0; i < ys.size(); ++i) {
    const double t = std::sqrt(std::max(ys[i] * ys[i] - cfg.h_u * cfg.h_u, 0.0));
    acc += ws[i] * (q == GainQuadrature::alpha_form
                        ? mean_gain_given_lt(pat, cfg.h_u, l, t)
                        : mean_gain_given_lt_chebyshev(pat, cfg.h_u, l, t));
  }
  return acc;
}

/// Cached mean interfering gain over a log-spaced radius grid with monotone
/// cubic interpolation (declared relative tolerance 1e-4). Immutable after
/// construction.
class GainProfile {
 public:
  static constexpr double kDeclaredTol = 1e-4;

  GainProfile() = default;

  explicit GainProfile(const Geometry& geom) {
    const NetworkConfig& cfg = geom.config();
    mode_ = cfg.oba == ObaTreatment::uniform_baseline
                ? Mode::uniform
                : (cfg.mode == AntennaMode::vertical ? Mode::vertical : Mode::steerable);
    h_u_ = cfg.h_u;
    pattern_ = cfg.uav_antenna;
    if (mode_ == Mode::uniform) {
      auto f = [&](double th) { return antenna_gain(pattern_, th); };
      num::QuadratureSpec spec;
      spec.rel_tol = 1e-11;
      uniform_value_ =
          num::integrate_adaptive(f, 0.0, num::kPi, spec).value / num::kPi;
      return;
    }
    if (mode_ == Mode::vertical) return;  // evaluated in closed form

    const int n = 256;
    const double lo = cfg.h_u;
    const double hi = std::max({3e6, 100.0 * geom.y_max(), 1e3 * cfg.h_u});
    std::vector<double> lx(n), gy(n);
    const auto& ys = geom.mixture_nodes();
    const auto& ws = geom.mixture_weights();
    const num::GaussNodes& gl = num::gauss_legendre(32);
    for (int i = 0; i < n; ++i) {
      const double r = lo * std::pow(hi / lo, double(i) / (n - 1));
      const double l = std::sqrt(std::max(r * r - h_u_ * h_u_, 0.0));
      double acc = 0.0;
      for (size_t j = 0; j < ys.size(); ++j) {
        const double t =
            std::sqrt(std::max(ys[j] * ys[j] - h_u_ * h_u_, 0.0));
        acc += ws[j] * fixed_alpha_mean(l, t, gl);
      }
      lx[i] = std::log(r);
      gy[i] = acc;
    }
    spline_ = num::Pchip(std::move(lx), std::move(gy));
  }

  double operator()(double r) const {
    switch (mode_) {
      case Mode::uniform: return uniform_value_;
      case Mode::vertical:
        return antenna_gain(pattern_, std::acos(std::min(h_u_ / std::max(r, h_u_), 1.0)));
      case Mode::steerable: return spline_(std::log(std::max(r, h_u_)));
    }
    return 0.0;
  }

 private:
  enum class Mode { steerable, vertical, uniform };

  double fixed_alpha_mean(double l, double t, const num::GaussNodes& gl) const {
    if (l * t == 0.0)
      return antenna_gain(pattern_, std::atan(std::max(l, t) / h_u_));
    const double h2 = h_u_ * h_u_;
    const double d = std::sqrt((h2 + l * l) * (h2 + t * t));
    double acc = 0.0;
    for (size_t i = 0; i < gl.x.size(); ++i) {
      const double a = 0.5 * num::kPi * (1.0 + gl.x[i]);
      acc += 0.5 * gl.w[i] *
             antenna_gain(pattern_,
                          std::acos(detail::cos_theta_of_alpha(h2, d, l * t, a)));
    }
    return acc;
  }

  Mode mode_ = Mode::steerable;
  double h_u_ = 0.0;
  double uniform_value_ = 0.0;
  AntennaPattern pattern_;
  num::Pchip spline_;
};

// ---------------------------------------------------------------------------
// Gain law: quantile nodes of the interfering-gain distribution per distance
// ---------------------------------------------------------------------------

/// Quantile nodes (Gauss-Legendre in probability) of the interfering UAV
/// antenna-gain distribution conditioned on the 3D distance r. The moment
/// engines take expectations of nonlinear functions of the gain against
/// these nodes; their weighted mean reproduces the Corollary-2 profile.
class GainLaw {
 public:
  static constexpr int kNodes = 32;

  GainLaw() = default;

  explicit GainLaw(const Geometry& geom) {
    const NetworkConfig& cfg = geom.config();
    h_u_ = cfg.h_u;
    pattern_ = cfg.uav_antenna;
    const num::GaussNodes& gl = num::gauss_legendre(kNodes);
    for (int i = 0; i < kNodes; ++i) {
      probs_[i] = 0.5 * (1.0 + gl.x[i]);
      weights_[i] = 0.5 * gl.w[i];
    }
    if (cfg.oba == ObaTreatment::uniform_baseline) {
      constant_rows_ = true;
      for (int i = 0; i < kNodes; ++i)
        row0_[i] = antenna_gain(pattern_, num::kPi * (1.0 - probs_[i]));
      return;
    }
    if (cfg.mode == AntennaMode::vertical) {
      vertical_ = true;
      return;
    }

    // steerable: per-distance quantiles of the Lemma-4 law
    const int nr = 144;
    const double lo = cfg.h_u;
    const double hi = std::max({3e6, 100.0 * geom.y_max(), 1e3 * cfg.h_u});
    log_r_.resize(nr);
    rows_.assign(nr, {});
    // condensed mixture nodes for the law build (the mixture CDF is smooth)
    std::vector<double> ts, ws;
    {
      const auto& ys_full = geom.mixture_nodes();
      const auto& ws_full = geom.mixture_weights();
      const size_t stride = std::max<size_t>(1, ys_full.size() / 144);
      for (size_t j = 0; j < ys_full.size(); j += stride) {
        double w = 0.0;
        double yw = 0.0;
        for (size_t q = j; q < std::min(j + stride, ys_full.size()); ++q) {
          w += ws_full[q];
          yw += ws_full[q] * ys_full[q];
        }
        if (w <= 0.0) continue;
        const double y = yw / w;
        ts.push_back(std::sqrt(std::max(y * y - h_u_ * h_u_, 0.0)));
        ws.push_back(w);
      }
    }

    const int n_theta = 384;
    std::vector<double> theta(n_theta), cdf(n_theta);
    for (int i = 0; i < nr; ++i) {
      const double r = lo * std::pow(hi / lo, double(i) / (nr - 1));
      log_r_[i] = std::log(r);
      const double l = std::sqrt(std::max(r * r - h_u_ * h_u_, 0.0));
      // support bracket over the mixture
      double th_lo = num::kPi, th_hi = 0.0;
      for (double t : ts) {
        const ObaSupport s = oba_bounds(h_u_, std::max(l, 1e-9), t);
        th_lo = std::min(th_lo, s.theta_min);
        th_hi = std::max(th_hi, s.theta_max);
      }
      th_lo = std::max(0.0, th_lo - 1e-6);
      th_hi = std::min(num::kPi, th_hi + 1e-6);
      for (int j = 0; j < n_theta; ++j) {
        theta[j] = th_lo + (th_hi - th_lo) * j / (n_theta - 1);
        double acc = 0.0;
        for (size_t m = 0; m < ts.size(); ++m)
          acc += ws[m] * oba_cdf_given_lt(h_u_, l, ts[m], theta[j]);
        cdf[j] = acc;
      }
      // enforce monotonicity against rounding
      for (int j = 1; j < n_theta; ++j) cdf[j] = std::max(cdf[j], cdf[j - 1]);
      auto cdf_exact = [&](double th) {
        double acc = 0.0;
        for (size_t m = 0; m < ts.size(); ++m)
          acc += ws[m] * oba_cdf_given_lt(h_u_, l, ts[m], th);
        return acc;
      };
      for (int q = 0; q < kNodes; ++q) {
        // gain quantile q corresponds to the angle quantile 1-q
        const double p = 1.0 - probs_[q];
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), p);
        double th;
        if (it == cdf.begin())
          th = theta.front();
        else if (it == cdf.end())
          th = theta.back();
        else {
          const size_t j = it - cdf.begin();
          const double c0 = cdf[j - 1], c1 = cdf[j];
          const double f = c1 > c0 ? (p - c0) / (c1 - c0) : 0.0;
          th = theta[j - 1] + f * (theta[j] - theta[j - 1]);
          // two secant corrections against the exact mixture CDF
          for (int step = 0; step < 2; ++step) {
            const double f1 = cdf_exact(th) - p;
            const double dth = 1e-4;
            const double f2 = cdf_exact(std::min(th + dth, th_hi)) - p;
            if (std::fabs(f2 - f1) > 1e-14)
              th = std::clamp(th - f1 * dth / (f2 - f1), th_lo, th_hi);
          }
        }
        rows_[i][q] = antenna_gain(pattern_, th);
      }
      // rows must be non-decreasing in q by construction
      for (int q = 1; q < kNodes; ++q)
        rows_[i][q] = std::max(rows_[i][q], rows_[i][q - 1]);
    }
  }

  bool vertical() const { return vertical_; }

  const std::array<double, kNodes>& weights() const { return weights_; }

  /// Gain nodes at distance r (log-linear interpolation between grid rows).
  void nodes(double r, std::array<double, kNodes>& out) const {
    if (constant_rows_) {
      out = row0_;
      return;
    }
    if (vertical_) {
      out.fill(antenna_gain(pattern_,
                            std::acos(std::min(h_u_ / std::max(r, h_u_), 1.0))));
      return;
    }
    const double x = std::clamp(std::log(std::max(r, h_u_)), log_r_.front(),
                                log_r_.back());
    const auto it = std::upper_bound(log_r_.begin(), log_r_.end(), x);
    if (it == log_r_.begin()) {
      out = rows_.front();
      return;
    }
    if (it == log_r_.end()) {
      out = rows_.back();
      return;
    }
    const size_t j = it - log_r_.begin();
    const double f = (x - log_r_[j - 1]) / (log_r_[j] - log_r_[j - 1]);
    for (int q = 0; q < kNodes; ++q)
      out[q] = rows_[j - 1][q] * (1.0 - f) + rows_[j][q] * f;
  }

  double mean(double r) const {
    std::array<double, kNodes> g;
    nodes(r, g);
    double acc = 0.0;
    for (int q = 0; q < kNodes; ++q) acc += weights_[q] * g[q];
    return acc;
  }

 private:
  double h_u_ = 0.0;
  AntennaPattern pattern_;
  bool vertical_ = false;
  bool constant_rows_ = false;
  std::array<double, kNodes> probs_{}, weights_{}, row0_{};
  std::vector<double> log_r_;
  std::vector<std::array<double, kNodes>> rows_;
};

// ---------------------------------------------------------------------------
// Bundled per-config analysis caches
// ---------------------------------------------------------------------------

/// Immutable bundle of all per-config caches used by the analytical and
/// Monte Carlo paths. Construction is single-threaded; queries are freely
/// concurrent.
class Analysis {
 public:
  explicit Analysis(const NetworkConfig& cfg)
      : geom_(cfg), profile_(geom_), law_(geom_) {}

  const NetworkConfig& config() const { return geom_.config(); }
  const Geometry& geometry() const { return geom_; }
  const GainProfile& gain_profile() const { return profile_; }
  const GainLaw& gain_law() const { return law_; }
  const AssociationResult& association() const { return geom_.association(); }

  /// Average power received from an interfering transmitter of tier k at 3D
  /// distance r (mean interfering gain for the UAV tiers).
  double interfering_power(Tier k, double r) const {
    const NetworkConfig& cfg = config();
    const TierParams& tp = cfg.tier(k);
    if (k == Tier::tbs) {
      if (!(r >= cfg.h_b))
        throw std::domain_error("interfering_power requires r >= tier altitude");
      const double g =
          antenna_gain(cfg.tbs_antenna, std::acos(std::min(cfg.h_b / r, 1.0)));
      return cfg.p_b * g * tp.kappa * std::pow(r, -tp.alpha);
    }
    if (!(r >= cfg.h_u))
      throw std::domain_error("interfering_power requires r >= tier altitude");
    return cfg.p_u * profile_(r) * tp.kappa * std::pow(r, -tp.alpha);
  }

 private:
  Geometry geom_;
  GainProfile profile_;
  GainLaw law_;
};

}  // namespace uavmeta
