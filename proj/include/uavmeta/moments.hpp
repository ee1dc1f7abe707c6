#pragma once

// Moments of the conditional success probability, the SINR meta distribution
// (beta matching and Gil-Pelaez inversion), mean local delay, and the
// noise-limited / isotropic / Rayleigh / primary-user special cases.
//
// Two moment engines are provided:
//
//  * MomentMethod::exact (default) - for integer Nakagami shapes the CSP is
//    Q(M, c(N0+I)) with Q(M,x) = e^-x sum_{j<M} x^j/j!, so integer-order
//    moments reduce to mixed derivatives of the interference Laplace
//    transform. The b-th moment uses the b-variate kernel
//    1 - prod_i MGF(s_i w) (independent fading replicas across the b CSP
//    factors) and the expectation over the interfering antenna gain is taken
//    against the exact OBA law. No Alzer or Jensen step is involved.
//
//  * MomentMethod::alzer_expansion - the double binomial sum with
//    phi_k = M_k (M_k!)^(-1/M_k), the shared-fading Jensen step, and the
//    fading MGF evaluated at the mean interfering power; kept as the
//    literal printed form for bias-direction comparisons.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "uavmeta/channel.hpp"
#include "uavmeta/config.hpp"
#include "uavmeta/errors.hpp"
#include "uavmeta/geometry.hpp"
#include "uavmeta/numerics.hpp"
#include "uavmeta/oba.hpp"

namespace uavmeta {

struct MomentResult {
  double gamma = 0.0;            // linear SINR threshold
  double order = 1.0;            // moment order b
  std::array<double, 3> per_tier{};  // M_{b|k}
  double total = 0.0;            // sum_k A_k M_{b|k}
  AssociationResult association;
  std::optional<double> variance;  // M_2 - M_1^2 when the {1,2} pair was computed
};

struct MetaDistributionCurve {
  enum class Method { beta, gil_pelaez, empirical };
  double gamma = 0.0;
  std::vector<double> xs;
  std::vector<double> values;  // F-bar(x)
  Method method = Method::beta;
};

struct DelayResult {
  double attempts = 0.0;  // +inf when divergent
  bool divergent = false;
  std::string diagnostic;
};

enum class MomentMethod { exact, alzer_expansion };

/// Structural-testing aid: drop the interference terms so the general engine
/// must reduce to the noise-limited corollary.
enum class InterferenceTerms { include, zero };

// ---------------------------------------------------------------------------
// Engine internals
// ---------------------------------------------------------------------------

namespace detail {

/// Quadrature nodes for Int_{chi}^{inf} f(r) dr under the power substitution
/// r = chi * u^(-1/(alpha-2)); fixed composite Gauss-Legendre, smooth
/// integrands only.
struct TailNodes {
  std::vector<double> r;
  std::vector<double> w;  // includes the jacobian
};

inline void build_tail_nodes(double chi, double alpha, int panels, int per,
                             TailNodes& out) {
  const double p = 1.0 / (alpha - 2.0);
  const num::GaussNodes& gl = num::gauss_legendre(per);
  out.r.clear();
  out.w.clear();
  out.r.reserve(panels * per);
  out.w.reserve(panels * per);
  for (int ip = 0; ip < panels; ++ip) {
    const double a = double(ip) / panels;
    const double b = double(ip + 1) / panels;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < per; ++i) {
      const double u = mid + half * gl.x[i];
      const double r = chi * std::pow(u, -p);
      const double jac = chi * p * std::pow(u, -p - 1.0);
      out.r.push_back(r);
      out.w.push_back(half * gl.w[i] * jac);
    }
  }
}

/// Interfering "gain sections" of one tier at radius r: (gain, prob-weight)
/// pairs; one deterministic section for the TBS tier and vertical UAVs,
/// GainLaw quantile nodes for steerable/uniform UAV tiers.
class GainSections {
 public:
  GainSections(const Analysis& an, Tier l) : an_(an), tier_(l) {
    deterministic_ = l == Tier::tbs || an.gain_law().vertical();
    if (!deterministic_) weights_ = an.gain_law().weights();
  }

  int count() const { return deterministic_ ? 1 : GainLaw::kNodes; }

  /// Fills gains[0..count); weight(i) matches.
  void gains_at(double r, std::array<double, GainLaw::kNodes>& g) const {
    const NetworkConfig& cfg = an_.config();
    if (tier_ == Tier::tbs) {
      g[0] = antenna_gain(cfg.tbs_antenna,
                          std::acos(std::min(cfg.h_b / r, 1.0)));
      return;
    }
    if (deterministic_) {
      g[0] = antenna_gain(cfg.uav_antenna,
                          std::acos(std::min(cfg.h_u / r, 1.0)));
      return;
    }
    an_.gain_law().nodes(r, g);
  }

  double weight(int i) const { return deterministic_ ? 1.0 : weights_[i]; }

 private:
  const Analysis& an_;
  Tier tier_;
  bool deterministic_ = false;
  std::array<double, GainLaw::kNodes> weights_{};
};

/// Radial integrals R_J = Int_{chi}^{inf} E_G[w^J (1+c w/M)^(-bM-J)]
/// lambda-bar(r) dr for J = 0..j_max, where w = P G kappa r^-alpha; the J = 0
/// entry instead carries the kernel E_G[1 - (1+c w/M)^(-bM)] (the PGFL
/// exponent itself).
inline void radial_integrals(const Analysis& an, Tier l, double chi, double c,
                             int b_replicas, int j_max, double* out) {
  const NetworkConfig& cfg = an.config();
  const TierParams& tp = cfg.tier(l);
  const int m = tp.fading_m;
  const double p_tx = l == Tier::tbs ? cfg.p_b : cfg.p_u;
  const double bm = double(b_replicas) * m;

  GainSections sec(an, l);
  const int ng = sec.count();
  TailNodes nodes;
  build_tail_nodes(std::max(chi, cfg.altitude(l)), tp.alpha, 6, 10, nodes);

  for (int j = 0; j <= j_max; ++j) out[j] = 0.0;
  std::array<double, GainLaw::kNodes> g;
  for (size_t i = 0; i < nodes.r.size(); ++i) {
    const double r = nodes.r[i];
    const double lam = intensity(cfg, l, r);
    if (lam <= 0.0) continue;
    const double base_w = p_tx * tp.kappa * std::pow(r, -tp.alpha);
    sec.gains_at(r, g);
    const double node_w = nodes.w[i] * lam;
    for (int q = 0; q < ng; ++q) {
      const double w = base_w * g[q];
      const double x = c * w / m;
      const double lg = std::log1p(x);
      const double gw = node_w * sec.weight(q);
      out[0] += gw * (-std::expm1(-bm * lg));
      if (j_max > 0) {
        const double step = std::exp(-lg);
        double pw = std::exp(-bm * lg) * step;  // (1+x)^-(bM+1)
        double wj = w;
        for (int j = 1; j <= j_max; ++j) {
          out[j] += gw * wj * pw;
          pw *= step;
          wj *= w;
        }
      }
    }
  }
}

/// Derivative-coefficient c_j = (M)(M+1)...(M+j-1) / M^j of the Nakagami MGF.
inline double mgf_deriv_coeff(int m, int j) {
  double c = 1.0;
  for (int i = 0; i < j; ++i) c *= double(m + i) / m;
  return c;
}

/// Noise-only kernel Q(M, x)^b via the finite CCDF sum of the gamma CDF.
inline double noise_only_kernel(int m, int b, double x) {
  double term = 1.0, sum = 1.0;
  for (int j = 1; j < m; ++j) {
    term *= x / j;
    sum += term;
  }
  const double q = std::exp(-x) * sum;
  return std::pow(std::clamp(q, 0.0, 1.0), double(b));
}

/// Exact kernel E[prod_i Q(M, c(N0 + I_i))] at one serving distance, where
/// the I_i are independent-fading replicas of the interference seen beyond
/// the matching radii chi[l]. Computed through mixed derivatives of
/// W(s_1..s_b) = exp(-(sum s_i) N0 - V(s_1..s_b)) at s_i = c.
inline double exact_kernel(const Analysis& an, Tier k, int b,
                           const std::array<double, 3>& chi, double c) {
  const NetworkConfig& cfg = an.config();
  const int mk = cfg.tier(k).fading_m;
  const int digits = mk;           // per-axis orders 0..M_k-1
  const int j_total_max = b * (mk - 1);

  // radial integrals per interfering tier
  std::array<std::vector<double>, 3> rj;
  for (Tier l : kTiers) {
    rj[tier_index(l)].assign(j_total_max + 1, 0.0);
    radial_integrals(an, l, chi[tier_index(l)], c, b, j_total_max,
                     rj[tier_index(l)].data());
  }

  // W tensor over the multi-index box {0..M_k-1}^b in mixed radix
  long box = 1;
  for (int i = 0; i < b; ++i) {
    box *= digits;
    if (box > 2'000'000)
      throw NumericError("moment order b too large for the exact engine");
  }
  std::vector<double> W(box, 0.0);
  std::vector<int> alpha(b), beta(b), delta(b);

  // V_alpha at s = c: depends on |alpha| and the product of per-axis
  // coefficients, summed over interfering tiers.
  auto v_alpha = [&](const std::vector<int>& a) {
    int tot = 0;
    for (int x : a) tot += x;
    if (tot == 0) {
      double v = 0.0;
      for (Tier l : kTiers) v += rj[tier_index(l)][0];
      return v;
    }
    double v = 0.0;
    for (Tier l : kTiers) {
      const int ml = cfg.tier(l).fading_m;
      double coef = 1.0;
      for (int x : a) coef *= mgf_deriv_coeff(ml, x);
      v += coef * rj[tier_index(l)][tot];
    }
    return (tot % 2 == 0 ? -1.0 : 1.0) * v;  // (-1)^(|a|+1) * positive sum
  };

  // Pascal triangle up to the per-axis order
  std::vector<std::vector<double>> binom(digits);
  for (int n = 0; n < digits; ++n) {
    binom[n].assign(n + 1, 1.0);
    for (int r = 1; r < n; ++r)
      binom[n][r] = binom[n - 1][r - 1] + binom[n - 1][r];
  }

  auto decode = [&](long idx, std::vector<int>& a) {
    for (int i = 0; i < b; ++i) {
      a[i] = idx % digits;
      idx /= digits;
    }
  };
  auto encode = [&](const std::vector<int>& a) {
    long idx = 0;
    for (int i = b - 1; i >= 0; --i) idx = idx * digits + a[i];
    return idx;
  };

  const double v0 = v_alpha(std::vector<int>(b, 0));
  W[0] = std::exp(-double(b) * c * cfg.n0 - v0);

  for (long idx = 1; idx < box; ++idx) {
    decode(idx, alpha);
    int p = 0;
    while (alpha[p] == 0) ++p;
    // W_alpha = -sum_{beta <= alpha - e_p} C(alpha-e_p, beta)
    //              Vt_{beta+e_p} W_{alpha-e_p-beta}
    std::vector<int> rem = alpha;
    rem[p] -= 1;
    // iterate beta over the sub-box [0..rem]
    std::fill(beta.begin(), beta.end(), 0);
    double acc = 0.0;
    while (true) {
      double cb = 1.0;
      for (int i = 0; i < b; ++i) cb *= binom[rem[i]][beta[i]];
      std::vector<int> vb = beta;
      vb[p] += 1;
      double vt = v_alpha(vb);
      {
        int tot = 0;
        for (int x : vb) tot += x;
        if (tot == 1) vt += cfg.n0;
      }
      for (int i = 0; i < b; ++i) delta[i] = rem[i] - beta[i];
      acc += cb * vt * W[encode(delta)];
      // advance beta
      int i = 0;
      while (i < b) {
        if (beta[i] < rem[i]) {
          ++beta[i];
          std::fill(beta.begin(), beta.begin() + i, 0);
          break;
        }
        ++i;
      }
      if (i == b) break;
    }
    W[idx] = -acc;
  }

  // kernel = sum_alpha prod_i [ c^{a_i} / a_i! ] (-1)^{|alpha|} W_alpha
  double kern = 0.0;
  std::vector<double> cpow(digits), fact(digits);
  cpow[0] = 1.0;
  fact[0] = 1.0;
  for (int j = 1; j < digits; ++j) {
    cpow[j] = cpow[j - 1] * c;
    fact[j] = fact[j - 1] * j;
  }
  for (long idx = 0; idx < box; ++idx) {
    decode(idx, alpha);
    double coef = 1.0;
    int tot = 0;
    for (int i = 0; i < b; ++i) {
      coef *= cpow[alpha[i]] / fact[alpha[i]];
      tot += alpha[i];
    }
    kern += coef * (tot % 2 ? -1.0 : 1.0) * W[idx];
  }
  return std::clamp(kern, 0.0, 1.0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSP moments
// ---------------------------------------------------------------------------

/// b-th moment of the conditional success probability (integer b >= 0).
inline MomentResult csp_moment(const Analysis& an, double gamma, int b,
                               MomentMethod method = MomentMethod::exact,
                               InterferenceTerms interference =
                                   InterferenceTerms::include) {
  if (!(gamma > 0.0)) throw std::domain_error("csp_moment requires gamma > 0");
  if (b < 0) throw std::domain_error("csp_moment requires b >= 0; use rayleigh_moment for b < 0");
  const NetworkConfig& cfg = an.config();
  const Geometry& geom = an.geometry();
  MomentResult out;
  out.gamma = gamma;
  out.order = b;
  out.association = geom.association();
  if (b == 0) {
    out.per_tier = {1.0, 1.0, 1.0};
    out.total = 1.0;
    return out;
  }

  for (Tier k : kTiers) {
    const double ak = geom.association()[k];
    const double alt = cfg.altitude(k);
    const int mk = cfg.tier(k).fading_m;
    double value = 0.0;

    if (method == MomentMethod::exact) {
      auto f = [&](double y) {
        const double lam = intensity(cfg, k, y);
        if (lam <= 0.0) return 0.0;
        std::array<double, 3> chi;
        double voide = 0.0;
        for (Tier l : kTiers) {
          chi[tier_index(l)] = geom.chi(k, l, y);
          voide += geom.measure(l, chi[tier_index(l)]);
        }
        if (voide > 700.0) return 0.0;
        const double c = gamma * mk / serving_power(cfg, k, y);
        const double kern =
            interference == InterferenceTerms::include
                ? detail::exact_kernel(an, k, b, chi, c)
                : detail::noise_only_kernel(mk, b, c * cfg.n0);
        return lam * std::exp(-voide) * kern;
      };
      num::QuadratureSpec spec;
      spec.abs_tol = 1e-7;
      spec.rel_tol = 1e-6;
      spec.max_depth = 20;
      value = num::integrate_adaptive(f, alt, geom.r_max(k), spec).value;
    } else {
      // Printed expansion: T_{k,m} Laplace integrals with the mean
      // interfering power and phi_k = M_k (M_k!)^(-1/M_k).
      double lfact = 0.0;
      for (int i = 2; i <= mk; ++i) lfact += std::log(double(i));
      const double phi = mk * std::exp(-lfact / mk);
      std::vector<double> T(mk * b + 1, 0.0);
      for (int m = 0; m <= mk * b; ++m) {
        auto f = [&](double y) {
          const double lam = intensity(cfg, k, y);
          if (lam <= 0.0) return 0.0;
          double e = 0.0;
          std::array<double, 3> chi;
          for (Tier l : kTiers) {
            chi[tier_index(l)] = geom.chi(k, l, y);
            e -= geom.measure(l, chi[tier_index(l)]);
          }
          if (e < -700.0) return 0.0;
          if (m > 0) {
            const double s = m * gamma * phi / serving_power(cfg, k, y);
            e -= s * cfg.n0;
            if (interference == InterferenceTerms::include)
            for (Tier l : kTiers) {
              const TierParams& tp = cfg.tier(l);
              detail::TailNodes nodes;
              detail::build_tail_nodes(
                  std::max(chi[tier_index(l)], cfg.altitude(l)), tp.alpha, 8,
                  12, nodes);
              double u = 0.0;
              for (size_t i = 0; i < nodes.r.size(); ++i) {
                const double r = nodes.r[i];
                const double lamr = intensity(cfg, l, r);
                if (lamr <= 0.0) continue;
                u += nodes.w[i] * lamr *
                     (1.0 - fading_mgf(tp.fading_m,
                                       s * an.interfering_power(l, r)));
              }
              e -= u;
            }
          }
          return lam * std::exp(e);
        };
        num::QuadratureSpec spec;
        spec.abs_tol = 1e-9;
        spec.rel_tol = 1e-8;
        spec.max_depth = 24;
        try {
          T[m] = num::integrate_adaptive(f, alt, geom.r_max(k), spec).value;
        } catch (const NumericError& e) {
          std::ostringstream msg;
          msg << "moment term (k=" << tier_name(k) << ", m=" << m
              << "): " << e.what();
          throw NumericError(msg.str());
        }
      }
      for (int n = 0; n <= b; ++n) {
        double cbn = 1.0;
        for (int i = 0; i < n; ++i) cbn = cbn * (b - i) / (i + 1);
        for (int m = 0; m <= mk * n; ++m) {
          double cm = 1.0;
          for (int i = 0; i < m; ++i) cm = cm * (mk * n - i) / (i + 1);
          value += cbn * cm * ((n + m) % 2 ? -1.0 : 1.0) * T[m];
        }
      }
    }
    out.per_tier[tier_index(k)] = ak > 0.0 ? value / ak : 0.0;
    out.total += value;
  }
  out.total = std::clamp(out.total, 0.0, 1.0);
  return out;
}

/// First two moments plus the CSP variance.
inline MomentResult csp_mean_variance(const Analysis& an, double gamma,
                                      MomentMethod method = MomentMethod::exact) {
  MomentResult m1 = csp_moment(an, gamma, 1, method);
  const MomentResult m2 = csp_moment(an, gamma, 2, method);
  m1.variance = std::max(m2.total - m1.total * m1.total, -1e-9);
  return m1;
}

// ---------------------------------------------------------------------------
// Rayleigh path: real (and complex) moment orders
// ---------------------------------------------------------------------------

namespace detail {

inline void require_rayleigh(const NetworkConfig& cfg, const char* who) {
  for (Tier t : kTiers)
    if (cfg.tier(t).fading_m != 1) {
      std::ostringstream msg;
      msg << who << " requires Rayleigh fading on every tier (m_fading = 1)";
      throw std::domain_error(msg.str());
    }
}

/// log1p-interference measure of one serving distance: weighted samples of
/// L = log(1 + gamma w / l_serv) against the radial x gain quadrature.
/// Z(b) = sum_j m_j (1 - exp(-b L_j)) reproduces the PGFL exponent for any
/// real or complex order b.
struct LogKernelSamples {
  std::vector<double> L;
  std::vector<double> m;

  template <class B>
  B exponent(B b) const {
    B acc{};
    for (size_t i = 0; i < L.size(); ++i)
      acc += m[i] * (1.0 - std::exp(-b * L[i]));
    return acc;
  }
};

inline void build_log_kernel(const Analysis& an, Tier k, double y,
                             double gamma, LogKernelSamples& out) {
  const NetworkConfig& cfg = an.config();
  const Geometry& geom = an.geometry();
  const double lk = serving_power(cfg, k, y);
  out.L.clear();
  out.m.clear();
  std::array<double, GainLaw::kNodes> g;
  for (Tier l : kTiers) {
    const TierParams& tp = cfg.tier(l);
    const double chi = std::max(geom.chi(k, l, y), cfg.altitude(l));
    GainSections sec(an, l);
    const int ng = sec.count();
    TailNodes nodes;
    build_tail_nodes(chi, tp.alpha, 8, 12, nodes);
    const double p_tx = l == Tier::tbs ? cfg.p_b : cfg.p_u;
    for (size_t i = 0; i < nodes.r.size(); ++i) {
      const double r = nodes.r[i];
      const double lam = intensity(cfg, l, r);
      if (lam <= 0.0) continue;
      const double base_w = p_tx * tp.kappa * std::pow(r, -tp.alpha);
      sec.gains_at(r, g);
      for (int q = 0; q < ng; ++q) {
        out.L.push_back(std::log1p(gamma * base_w * g[q] / lk));
        out.m.push_back(nodes.w[i] * lam * sec.weight(q));
      }
    }
  }
}

}  // namespace detail

/// Rayleigh-fading moment of real order b (exact; Corollary-7 path).
/// Requires m_fading = 1 on all tiers. Divergent integrands (negative b past
/// the delay phase transition) are the caller's concern; see
/// mean_local_delay for the guarded b = -1 evaluation.
inline MomentResult rayleigh_moment(const Analysis& an, double gamma, double b) {
  const NetworkConfig& cfg = an.config();
  detail::require_rayleigh(cfg, "rayleigh_moment");
  const Geometry& geom = an.geometry();
  MomentResult out;
  out.gamma = gamma;
  out.order = b;
  out.association = geom.association();
  detail::LogKernelSamples samples;
  for (Tier k : kTiers) {
    auto f = [&](double y) {
      const double lam = intensity(cfg, k, y);
      if (lam <= 0.0) return 0.0;
      double e = 0.0;
      for (Tier l : kTiers) e -= geom.measure(l, geom.chi(k, l, y));
      if (e < -700.0) return 0.0;
      e -= b * gamma * cfg.n0 / serving_power(cfg, k, y);
      detail::build_log_kernel(an, k, y, gamma, samples);
      e -= samples.exponent(b);
      return lam * std::exp(e);
    };
    num::QuadratureSpec spec;
    spec.abs_tol = 1e-8;
    spec.rel_tol = 1e-7;
    spec.max_depth = 22;
    const double v =
        num::integrate_adaptive(f, cfg.altitude(k), geom.r_max(k), spec).value;
    const double ak = geom.association()[k];
    out.per_tier[tier_index(k)] = ak > 0.0 ? v / ak : 0.0;
    out.total += v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Meta distribution: beta matching
// ---------------------------------------------------------------------------

inline MetaDistributionCurve meta_distribution_beta(double m1, double m2,
                                                    std::vector<double> xs) {
  if (!(m1 > 0.0) || !(m1 < 1.0))
    throw std::domain_error("beta matching requires 0 < m1 < 1");
  if (m2 > m1 + 1e-12 || m2 < m1 * m1 - 1e-12)
    throw std::domain_error("beta matching requires m1^2 <= m2 <= m1");
  MetaDistributionCurve curve;
  curve.method = MetaDistributionCurve::Method::beta;
  curve.xs = std::move(xs);
  curve.values.resize(curve.xs.size());
  const double var = m2 - m1 * m1;
  if (var < 1e-12) {
    // degenerate: point mass at m1
    for (size_t i = 0; i < curve.xs.size(); ++i)
      curve.values[i] = curve.xs[i] < m1 ? 1.0 : 0.0;
    return curve;
  }
  const double scale = (m1 - m2) / var;
  const double a = m1 * scale;
  const double b = (1.0 - m1) * scale;
  for (size_t i = 0; i < curve.xs.size(); ++i) {
    const double x = std::clamp(curve.xs[i], 0.0, 1.0);
    curve.values[i] = 1.0 - num::reg_inc_beta(x, a, b);
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Meta distribution: Gil-Pelaez inversion (Rayleigh-only configs)
// ---------------------------------------------------------------------------

namespace detail {

/// Cached imaginary moments M_{it}: per-(tier, y-node) log-kernel samples,
/// binned to a piecewise-linear density in L so that the oscillatory factor
/// integrates analytically at any t (no phase aliasing at large t).
class ImaginaryMomentTable {
 public:
  ImaginaryMomentTable(const Analysis& an, double gamma) {
    const NetworkConfig& cfg = an.config();
    const Geometry& geom = an.geometry();
    require_rayleigh(cfg, "meta_distribution_gilpelaez");
    LogKernelSamples samples;
    for (Tier k : kTiers) {
      const double alt = cfg.altitude(k);
      const double hi = geom.r_max(k);
      const int panels = 24, per = 8;
      const num::GaussNodes& gl = num::gauss_legendre(per);
      const double ratio = std::pow(hi / alt, 1.0 / panels);
      for (int p = 0; p < panels; ++p) {
        const double a = alt * std::pow(ratio, p);
        const double b = std::min(alt * std::pow(ratio, p + 1), hi);
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int i = 0; i < per; ++i) {
          const double y = mid + half * gl.x[i];
          const double lam = intensity(cfg, k, y);
          if (lam <= 0.0) continue;
          double voide = 0.0;
          for (Tier l : kTiers) voide += geom.measure(l, geom.chi(k, l, y));
          if (voide > 700.0) continue;
          Node node;
          node.weight = half * gl.w[i] * lam * std::exp(-voide);
          node.noise_phase = gamma * cfg.n0 / serving_power(cfg, k, y);
          build_log_kernel(an, k, y, gamma, samples);
          bin_samples(samples, node);
          nodes_.push_back(std::move(node));
        }
      }
    }
  }

  /// M_{it} (t >= 0). Exact in t given the piecewise-linear L-densities.
  std::complex<double> moment(double t) const {
    std::complex<double> acc{0.0, 0.0};
    for (const Node& n : nodes_) {
      // Z(it) = total - Int exp(-i t L) rho(L) dL over the bins
      std::complex<double> z{n.total, 0.0};
      z -= transform(n, t);
      const std::complex<double> e =
          -z - std::complex<double>(0.0, t * n.noise_phase);
      acc += n.weight * std::exp(e);
    }
    return acc;
  }

 private:
  static constexpr int kBins = 512;

  struct Node {
    double weight = 0.0;
    double noise_phase = 0.0;
    double total = 0.0;  // total interference measure mass
    double l_max = 0.0;
    std::array<double, kBins + 1> density{};  // piecewise-linear in L
  };

  static void bin_samples(const LogKernelSamples& s, Node& node) {
    node.total = 0.0;
    node.l_max = 1e-12;
    for (size_t i = 0; i < s.L.size(); ++i)
      if (s.m[i] > 0.0) node.l_max = std::max(node.l_max, s.L[i]);
    node.density.fill(0.0);
    const double h = node.l_max / kBins;
    for (size_t i = 0; i < s.L.size(); ++i) {
      const double m = s.m[i];
      if (!(m > 0.0)) continue;
      node.total += m;
      const double pos = std::clamp(s.L[i] / h, 0.0, double(kBins) - 1e-9);
      const int j = int(pos);
      const double f = pos - j;
      // linear deposit conserves mass and first moment
      node.density[j] += m * (1.0 - f) / h;
      node.density[j + 1] += m * f / h;
    }
  }

  /// Int_0^{l_max} exp(-i t L) rho(L) dL with rho piecewise linear.
  static std::complex<double> transform(const Node& n, double t) {
    const double h = n.l_max / kBins;
    if (t * h < 1e-4) {
      // nearly constant phase: second-order expansion per bin
      std::complex<double> acc{0.0, 0.0};
      for (int j = 0; j < kBins; ++j) {
        const double mass = 0.5 * (n.density[j] + n.density[j + 1]) * h;
        const double lmid = (j + 0.5) * h;
        acc += mass * std::exp(std::complex<double>(0.0, -t * lmid));
      }
      return acc;
    }
    // exact per-bin integral of e^{-itL} (a + s L):
    //   Int_bin = [e^{-itL} ((a + sL)/(-it) - s/(-it)^2)] evaluated at ends
    const std::complex<double> mit{0.0, -t};
    const std::complex<double> inv = 1.0 / mit;
    const std::complex<double> inv2 = inv * inv;
    std::complex<double> acc{0.0, 0.0};
    const std::complex<double> step = std::exp(mit * h);
    std::complex<double> e0{1.0, 0.0};  // e^{-it L_j}
    for (int j = 0; j < kBins; ++j) {
      const double d0 = n.density[j], d1 = n.density[j + 1];
      const double slope = (d1 - d0) / h;
      const std::complex<double> e1 = e0 * step;
      // antiderivative F(L) = e^{-it(L-L_j)} ((d0 + slope (L-L_j)) inv - slope inv2)
      const std::complex<double> f_hi = e1 * ((d0 + slope * h) * inv - slope * inv2);
      const std::complex<double> f_lo = d0 * inv - slope * inv2;
      acc += e0 * 0.0 + (f_hi - f_lo) * e0;
      e0 = e1;
    }
    return acc;
  }

  std::vector<Node> nodes_;
};

}  // namespace detail

/// SINR meta distribution by Gil-Pelaez inversion of the imaginary moments.
/// Restricted to all-Rayleigh configs, where the complex-order moment kernel
/// is exact.
inline MetaDistributionCurve meta_distribution_gilpelaez(const Analysis& an,
                                                         double gamma,
                                                         std::vector<double> xs) {
  detail::require_rayleigh(an.config(), "meta_distribution_gilpelaez");
  detail::ImaginaryMomentTable table(an, gamma);

  // sample M_{it} on a graded grid and interpolate with cubic Hermite
  std::vector<double> ts;
  for (double t = 0.05; t < 2.0; t += 0.05) ts.push_back(t);
  for (double t = 2.0; t < 20.0; t += 0.25) ts.push_back(t);
  for (double t = 20.0; t < 100.0; t += 1.0) ts.push_back(t);
  for (double t = 100.0; t <= 2000.0; t += 5.0) ts.push_back(t);
  std::vector<std::complex<double>> ms;
  ms.reserve(ts.size());
  size_t n_used = 0;
  for (size_t i = 0; i < ts.size(); ++i) {
    ms.push_back(table.moment(ts[i]));
    n_used = i + 1;
    if (std::abs(ms.back()) / ts[i] < 1e-10) break;  // truncation rule
  }
  ts.resize(n_used);
  ms.resize(n_used);
  const double t_end = ts.back();
  auto m_interp = [&](double t) -> std::complex<double> {
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    if (it == ts.begin()) return ms.front();
    if (it == ts.end()) return ms.back();
    const size_t j = it - ts.begin();
    const double f = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
    // Catmull-Rom style cubic through neighboring samples
    const size_t j0 = j >= 2 ? j - 2 : 0;
    const size_t j2 = j + 1 < ts.size() ? j + 1 : j;
    auto hermite = [&](auto p0, auto p1, auto m0, auto m1) {
      const double t2 = f * f, t3 = t2 * f;
      return p0 * (2 * t3 - 3 * t2 + 1) + m0 * (t3 - 2 * t2 + f) +
             p1 * (-2 * t3 + 3 * t2) + m1 * (t3 - t2);
    };
    const double h = ts[j] - ts[j - 1];
    const std::complex<double> d0 =
        (ms[j] - ms[j0]) / (ts[j] - ts[j0]) * h;
    const std::complex<double> d1 =
        (ms[j2] - ms[j - 1]) / (ts[j2] - ts[j - 1]) * h;
    return hermite(ms[j - 1], ms[j], d0, d1);
  };

  // E[ln P] estimate for the t -> 0 limit of the integrand
  const double e_lnp = std::imag(ms.front()) / ts.front();

  MetaDistributionCurve curve;
  curve.method = MetaDistributionCurve::Method::gil_pelaez;
  curve.gamma = gamma;
  curve.xs = std::move(xs);
  curve.values.resize(curve.xs.size());
  const num::GaussNodes& gl = num::gauss_legendre(10);
  for (size_t ix = 0; ix < curve.xs.size(); ++ix) {
    const double x = std::clamp(curve.xs[ix], 1e-12, 1.0 - 1e-12);
    const double lx = std::log(x);
    auto f = [&](double t) {
      return std::imag(std::exp(std::complex<double>(0.0, -t * lx)) *
                       m_interp(t)) / t;
    };
    // panel width tied to the joint oscillation rate; alternating panel sums
    // are Euler-accelerated at the truncation end
    const double rate = std::fabs(lx - e_lnp) + 0.5;
    const double h = num::kPi / rate;
    double acc = f(ts.front()) * 0.5 * ts.front();  // small-t closing
    acc += 0.5 * (e_lnp - lx) * 0.5 * ts.front();
    std::vector<double> partials;
    double t0 = ts.front();
    while (t0 < t_end) {
      const double t1 = std::min(t0 + h, t_end);
      double panel = 0.0;
      for (size_t i = 0; i < gl.x.size(); ++i) {
        const double t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * gl.x[i];
        panel += 0.5 * (t1 - t0) * gl.w[i] * f(t);
      }
      acc += panel;
      partials.push_back(acc);
      t0 = t1;
    }
    // Euler acceleration of the alternating tail: average the last partial
    // sums three times
    if (partials.size() >= 8) {
      std::vector<double> tailv(partials.end() - 8, partials.end());
      for (int round = 0; round < 3; ++round)
        for (size_t i = 0; i + 1 < tailv.size(); ++i)
          tailv[i] = 0.5 * (tailv[i] + tailv[i + 1]);
      acc = tailv[0];
    }
    curve.values[ix] = std::clamp(0.5 + acc / num::kPi, 0.0, 1.0);
  }
  // enforce monotonicity against residual quadrature wiggle
  for (size_t i = 1; i < curve.values.size(); ++i)
    curve.values[i] = std::min(curve.values[i], curve.values[i - 1]);
  return curve;
}

// ---------------------------------------------------------------------------
// Mean local delay
// ---------------------------------------------------------------------------

/// Mean local delay D = sum_k A_k M_{-1|k} (Rayleigh-only). Returns a typed
/// divergence flag: before integrating, the b = -1 integrand is probed at
/// geometrically increasing radii beyond the serving-density decay scale;
/// growth on 5 consecutive probes declares the phase transition.
inline DelayResult mean_local_delay(const Analysis& an, double gamma) {
  const NetworkConfig& cfg = an.config();
  detail::require_rayleigh(cfg, "mean_local_delay");
  const Geometry& geom = an.geometry();
  DelayResult out;
  detail::LogKernelSamples samples;

  auto log_integrand = [&](Tier k, double y) {
    const double lam = intensity(cfg, k, y);
    if (lam <= 0.0) return -std::numeric_limits<double>::infinity();
    double e = std::log(lam);
    for (Tier l : kTiers) e -= geom.measure(l, geom.chi(k, l, y));
    e += gamma * cfg.n0 / serving_power(cfg, k, y);
    detail::build_log_kernel(an, k, y, gamma, samples);
    e -= samples.exponent(-1.0);
    return e;
  };

  double total = 0.0;
  for (Tier k : kTiers) {
    const double alt = cfg.altitude(k);
    const double y_dec = geom.r_max(k);
    // probe for divergence
    double prev = log_integrand(k, y_dec);
    int rising = 0;
    double y_cut = y_dec;
    bool divergent = false;
    for (int j = 1; j <= 40; ++j) {
      const double y = y_dec * std::pow(1.5, j);
      const double cur = log_integrand(k, y);
      if (cur > prev) {
        if (++rising >= 5) {
          divergent = true;
          std::ostringstream d;
          d << "b = -1 integrand grows beyond y ~ "
            << y_dec * std::pow(1.5, j - 5) << " m for serving tier "
            << tier_name(k) << " (local-delay phase transition)";
          out.diagnostic = d.str();
          break;
        }
      } else {
        rising = 0;
        if (cur < -40.0) {  // integrand negligible and falling
          y_cut = y;
          break;
        }
      }
      y_cut = y;
      prev = cur;
    }
    if (divergent) {
      out.divergent = true;
      out.attempts = std::numeric_limits<double>::infinity();
      return out;
    }
    auto f = [&](double y) {
      const double e = log_integrand(k, y);
      return e > -700.0 ? std::exp(e) : 0.0;
    };
    num::QuadratureSpec spec;
    spec.abs_tol = 1e-8;
    spec.rel_tol = 1e-7;
    spec.max_depth = 22;
    total += num::integrate_adaptive(f, alt, y_cut, spec).value;
  }
  out.attempts = total;
  return out;
}

// ---------------------------------------------------------------------------
// Special cases
// ---------------------------------------------------------------------------

/// omega solving Gamma(M, M omega) = x Gamma(M); exact -ln x at M = 1.
inline double noise_limited_omega(int m, double x) {
  if (!(x > 0.0) || !(x < 1.0))
    throw std::domain_error("noise_limited_omega requires x in (0,1)");
  if (m == 1) return -std::log(x);
  auto f = [&](double w) { return num::reg_gamma_q(m, m * w); };
  // Q decreasing in omega
  return num::bisect_monotone(f, x, 1e-12, 4.0, 1e-13);
}

/// Noise-limited moment: interference dropped, exact gamma-CDF kernel.
inline MomentResult noise_limited_moment(const Analysis& an, double gamma,
                                         double b) {
  const NetworkConfig& cfg = an.config();
  const Geometry& geom = an.geometry();
  MomentResult out;
  out.gamma = gamma;
  out.order = b;
  out.association = geom.association();
  for (Tier k : kTiers) {
    const int mk = cfg.tier(k).fading_m;
    auto f = [&](double y) {
      const double lam = intensity(cfg, k, y);
      if (lam <= 0.0) return 0.0;
      double voide = 0.0;
      for (Tier l : kTiers) voide += geom.measure(l, geom.chi(k, l, y));
      if (voide > 700.0) return 0.0;
      const double q =
          num::reg_gamma_q(mk, gamma * cfg.n0 * mk / serving_power(cfg, k, y));
      return lam * std::exp(-voide) * std::pow(q, b);
    };
    num::QuadratureSpec spec;
    spec.abs_tol = 1e-9;
    spec.rel_tol = 1e-8;
    const double v =
        num::integrate_adaptive(f, cfg.altitude(k), geom.r_max(k), spec).value;
    const double ak = geom.association()[k];
    out.per_tier[tier_index(k)] = ak > 0.0 ? v / ak : 0.0;
    out.total += v;
  }
  return out;
}

/// Noise-limited (SNR) meta distribution via the omega solver.
inline MetaDistributionCurve noise_limited_md(const Analysis& an, double gamma,
                                              std::vector<double> xs) {
  const NetworkConfig& cfg = an.config();
  const Geometry& geom = an.geometry();
  MetaDistributionCurve curve;
  curve.gamma = gamma;
  curve.method = MetaDistributionCurve::Method::beta;  // analytic closed curve
  curve.xs = std::move(xs);
  curve.values.resize(curve.xs.size());
  for (size_t i = 0; i < curve.xs.size(); ++i) {
    const double x = curve.xs[i];
    if (x <= 0.0) {
      curve.values[i] = 1.0;
      continue;
    }
    if (x >= 1.0) {
      curve.values[i] = 0.0;
      continue;
    }
    double acc = 0.0;
    for (Tier k : kTiers) {
      const double ak = geom.association()[k];
      if (ak <= 0.0) continue;
      if (cfg.n0 <= 0.0) {
        acc += ak;  // no noise: CSP = 1 surely
        continue;
      }
      const double omega = noise_limited_omega(cfg.tier(k).fading_m, x);
      const double y_star = geom.inverse_power(k, gamma * cfg.n0 / omega);
      acc += ak * geom.serving_cdf(k, y_star);
    }
    curve.values[i] = std::clamp(acc, 0.0, 1.0);
  }
  return curve;
}

/// Canonical isotropic antenna pattern: closed-form matching radii
/// chi_{k,l}(y) = eta^(1/alpha_l) y^(alpha_k/alpha_l); independent of the
/// antenna mode. Runs the exact engine against an internally flattened
/// configuration.
inline MomentResult isotropic_moment(const NetworkConfig& cfg_in, double gamma,
                                     int b) {
  NetworkConfig cfg = cfg_in;
  cfg.tbs_antenna.sidelobe_db = 0.0;
  cfg.uav_antenna.sidelobe_db = 0.0;
  const Analysis an(cfg);
  const Geometry& geom = an.geometry();

  auto p_g = [&](Tier k) {
    return (k == Tier::tbs ? cfg.p_b * cfg.tbs_antenna.max_gain
                           : cfg.p_u * cfg.uav_antenna.max_gain) *
           cfg.tier(k).kappa;
  };

  MomentResult out;
  out.gamma = gamma;
  out.order = b;
  out.association = geom.association();
  if (b == 0) {
    out.per_tier = {1.0, 1.0, 1.0};
    out.total = 1.0;
    return out;
  }
  for (Tier k : kTiers) {
    const int mk = cfg.tier(k).fading_m;
    auto f = [&](double y) {
      const double lam = intensity(cfg, k, y);
      if (lam <= 0.0) return 0.0;
      std::array<double, 3> chi;
      double voide = 0.0;
      for (Tier l : kTiers) {
        const double eta = p_g(l) / p_g(k);
        const double al = cfg.tier(l).alpha, ak = cfg.tier(k).alpha;
        double x = std::pow(eta, 1.0 / al) * std::pow(y, ak / al);
        x = std::max(x, cfg.altitude(l));
        chi[tier_index(l)] = x;
        voide += geom.measure(l, x);
      }
      if (voide > 700.0) return 0.0;
      const double c = gamma * mk / serving_power(cfg, k, y);
      return lam * std::exp(-voide) * detail::exact_kernel(an, k, b, chi, c);
    };
    num::QuadratureSpec spec;
    spec.abs_tol = 1e-8;
    spec.rel_tol = 1e-7;
    spec.max_depth = 24;
    const double v =
        num::integrate_adaptive(f, cfg.altitude(k), geom.r_max(k), spec).value;
    const double ak = geom.association()[k];
    out.per_tier[tier_index(k)] = ak > 0.0 ? v / ak : 0.0;
    out.total += v;
  }
  out.total = std::clamp(out.total, 0.0, 1.0);
  return out;
}

/// Primary user: a dedicated LoS UAV hovers at the zenith (distance h_u,
/// boresight gain); every other transmitter interferes with no exclusion
/// region. The moment uses the exact engine at the pinned serving link.
inline MomentResult primary_user_moment(const Analysis& an, double gamma,
                                        int b) {
  const NetworkConfig& cfg = an.config();
  MomentResult out;
  out.gamma = gamma;
  out.order = b;
  out.association.mode = cfg.mode;
  out.association.a = {0.0, 1.0, 0.0};
  if (b == 0) {
    out.per_tier = {0.0, 1.0, 0.0};
    out.total = 1.0;
    return out;
  }
  const TierParams& tl = cfg.tier(Tier::los_uav);
  const double l_pu = cfg.p_u * cfg.uav_antenna.max_gain * tl.kappa *
                      std::pow(cfg.h_u, -tl.alpha);
  std::array<double, 3> chi = {cfg.h_b, cfg.h_u, cfg.h_u};  // no exclusions
  const double c = gamma * tl.fading_m / l_pu;
  const double v = detail::exact_kernel(an, Tier::los_uav, b, chi, c);
  out.per_tier[tier_index(Tier::los_uav)] = v;
  out.total = v;
  return out;
}

// ---------------------------------------------------------------------------
// Density-ladder decay check (asymptotic behavior)
// ---------------------------------------------------------------------------

struct LadderReport {
  std::vector<double> densities;  // per m^2
  std::vector<double> values;     // M_b at each rung
  bool monotone_after_peak = true;
  double final_value = 1.0;
};

/// Evaluates M_b along a geometric density ladder (x10 per rung) and reports
/// the decay pattern expected as the density grows without bound.
inline LadderReport asymptotic_moment_check(const NetworkConfig& cfg_in,
                                            DensityLimit which, double gamma,
                                            int b, int rungs = 4) {
  LadderReport rep;
  for (int i = 0; i < rungs; ++i) {
    NetworkConfig cfg = cfg_in;
    const double f = std::pow(10.0, i);
    if (which == DensityLimit::lambda_b_inf)
      cfg.lambda_b *= f;
    else
      cfg.lambda_u *= f;
    Analysis an(cfg);
    rep.densities.push_back(which == DensityLimit::lambda_b_inf ? cfg.lambda_b
                                                                : cfg.lambda_u);
    rep.values.push_back(csp_moment(an, gamma, b).total);
  }
  size_t peak = 0;
  for (size_t i = 1; i < rep.values.size(); ++i)
    if (rep.values[i] > rep.values[peak]) peak = i;
  for (size_t i = peak + 1; i + 1 < rep.values.size(); ++i)
    if (rep.values[i + 1] > rep.values[i] + 1e-9)
      rep.monotone_after_peak = false;
  rep.final_value = rep.values.back();
  return rep;
}

}  // namespace uavmeta
