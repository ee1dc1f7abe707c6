#pragma once

// Shared numerical kernels: adaptive Gauss-Kronrod quadrature (finite and
// semi-infinite), monotone bisection, Gauss-Legendre/Gauss-Chebyshev nodes,
// monotone cubic interpolation, and the special functions used by the
// analytical framework (ln Gamma, regularized incomplete beta / gamma).
// Everything is deterministic and dependency-free so that pinned test values
// stay stable across builds on the same platform.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "uavmeta/errors.hpp"

namespace uavmeta::num {

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Adaptive quadrature (Gauss 7 / Kronrod 15)
// ---------------------------------------------------------------------------

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  int max_depth = 38;
  enum class Transform { none, log, tail_exp } transform = Transform::none;
};

template <class T>
struct QuadratureResult {
  T value{};
  double error = 0.0;  // achieved error estimate
  long evals = 0;
};

namespace detail {

// QUADPACK 15-point Kronrod rule with embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

inline double norm_of(double v) { return std::fabs(v); }
inline double norm_of(const std::complex<double>& v) { return std::abs(v); }

template <class T, class F>
void gk15(F&& f, double a, double b, T& kronrod, T& gauss) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  T k{};
  T g{};
  for (int i = 0; i < 8; ++i) {
    const double dx = half * kKronrodNodes[i];
    T fv = (i == 7) ? T(f(mid)) : T(f(mid - dx) + f(mid + dx));
    k += kKronrodWeights[i] * fv;
    if (i % 2 == 1) g += kGaussWeights[i / 2] * fv;
  }
  kronrod = half * k;
  gauss = half * g;
}

template <class T, class F>
void adapt(F&& f, double a, double b, double tol, int depth,
           QuadratureResult<T>& out, double& worst_err, double& worst_loc,
           int max_depth) {
  T k, g;
  gk15(f, a, b, k, g);
  out.evals += 15;
  const double err = norm_of(T(k - g));
  if (err <= tol || depth >= max_depth) {
    out.value += k;
    out.error += err;
    if (depth >= max_depth && err > tol && err > worst_err) {
      worst_err = err;
      worst_loc = 0.5 * (a + b);
    }
    return;
  }
  const double mid = 0.5 * (a + b);
  adapt(f, a, mid, 0.5 * tol, depth + 1, out, worst_err, worst_loc, max_depth);
  adapt(f, mid, b, 0.5 * tol, depth + 1, out, worst_err, worst_loc, max_depth);
}

}  // namespace detail

namespace detail {

/// Untransformed adaptive core over a finite interval.
template <class F>
auto integrate_core(F&& f, double a, double b, const QuadratureSpec& spec) {
  using T = std::decay_t<decltype(f(a))>;
  if (!(a < b)) throw NumericError("integrate_adaptive requires a < b");
  QuadratureResult<T> out;
  T k, g;
  detail::gk15(f, a, b, k, g);
  out.evals = 15;
  const double scale = detail::norm_of(k);
  const double tol = std::max(spec.abs_tol, spec.rel_tol * scale);
  const double err0 = detail::norm_of(T(k - g));
  if (err0 <= tol) {
    out.value = k;
    out.error = err0;
    return out;
  }
  double worst_err = 0.0, worst_loc = a;
  const double mid = 0.5 * (a + b);
  detail::adapt(f, a, mid, 0.5 * tol, 1, out, worst_err, worst_loc,
                spec.max_depth);
  detail::adapt(f, mid, b, 0.5 * tol, 1, out, worst_err, worst_loc,
                spec.max_depth);
  if (worst_err > 100.0 * tol) {
    std::ostringstream msg;
    msg << "quadrature depth exhausted near x = " << worst_loc
        << " (panel error " << worst_err << ", tol " << tol << ")";
    throw NumericError(msg.str());
  }
  return out;
}

}  // namespace detail

/// Integrates f over [a, b] adaptively. b may be +infinity when the spec
/// declares the tail_exp transform (substitution u = 1/(1 + (y - a))).
template <class F>
auto integrate_adaptive(F&& f, double a, double b,
                        const QuadratureSpec& spec = {}) {
  using T = std::decay_t<decltype(f(a))>;
  using Transform = QuadratureSpec::Transform;

  if (spec.transform == Transform::tail_exp) {
    if (!std::isinf(b)) throw NumericError("tail_exp transform requires b = +inf");
    auto g = [&f, a](double u) {
      const double y = a + (1.0 - u) / u;
      return T(f(y) / (u * u));
    };
    return detail::integrate_core(g, 0.0, 1.0, spec);
  }
  if (spec.transform == Transform::log) {
    if (!(a > 0.0) || !(b > a) || std::isinf(b))
      throw NumericError("log transform requires 0 < a < b < inf");
    auto g = [&f](double u) {
      const double y = std::exp(u);
      return T(f(y) * y);
    };
    return detail::integrate_core(g, std::log(a), std::log(b), spec);
  }
  return detail::integrate_core(f, a, b, spec);
}

/// Integrates f over [a, inf) where f decays like r^(1-alpha) with alpha > 2,
/// via the power substitution r = a * u^(-1/(alpha-2)) that maps the tail to
/// a bounded, regular integrand on (0, 1].
template <class F>
auto integrate_power_tail(F&& f, double a, double alpha,
                          const QuadratureSpec& spec = {}) {
  using T = std::decay_t<decltype(f(a))>;
  if (!(alpha > 2.0)) throw NumericError("power tail requires alpha > 2");
  if (!(a > 0.0)) throw NumericError("power tail requires a > 0");
  const double p = 1.0 / (alpha - 2.0);
  auto g = [&f, a, p](double u) {
    const double r = a * std::pow(u, -p);
    const double jac = a * p * std::pow(u, -p - 1.0);
    return T(f(r) * jac);
  };
  return detail::integrate_core(g, 0.0, 1.0, spec);
}

// ---------------------------------------------------------------------------
// Monotone bisection
// ---------------------------------------------------------------------------

/// Solves f(x) = target for strictly monotone f. The bracket [lo, hi] is grown
/// geometrically (up to 60 doublings of the width) until it straddles the
/// target, then bisected to relative tolerance rel_tol on x.
template <class F>
double bisect_monotone(F&& f, double target, double lo, double hi,
                       double rel_tol = 1e-12) {
  if (!(lo < hi)) throw NumericError("bisect_monotone: empty bracket");
  double flo = f(lo);
  double fhi = f(hi);
  const bool increasing = fhi > flo;
  auto above = [&](double fv) { return increasing ? fv >= target : fv <= target; };
  if (above(flo) && lo > 0.0) {
    // target below the left edge for increasing f: grow downward
    int n = 0;
    while (above(flo)) {
      if (++n > 60) throw NumericError("bisect_monotone: bracket growth cap (low side)");
      hi = lo;
      lo *= 0.5;
      flo = f(lo);
    }
  } else {
    int n = 0;
    while (!above(fhi)) {
      if (++n > 60) throw NumericError("bisect_monotone: bracket growth cap (high side)");
      lo = hi;
      hi += (hi - lo > 0 ? hi - lo : hi);  // double the span
      hi = std::max(hi, 2.0 * lo);
      fhi = f(hi);
    }
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= rel_tol * std::max(1.0, std::fabs(mid))) return mid;
    if (above(f(mid)))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Fixed quadrature nodes
// ---------------------------------------------------------------------------

struct GaussNodes {
  std::vector<double> x;  // on (-1, 1)
  std::vector<double> w;
};

/// Gauss-Legendre nodes/weights by Newton iteration on the Legendre
/// recurrence; cached per order.
inline const GaussNodes& gauss_legendre(int n) {
  static thread_local std::vector<std::pair<int, GaussNodes>> cache;
  for (auto& e : cache)
    if (e.first == n) return e.second;
  GaussNodes g;
  g.x.resize(n);
  g.w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    g.x[i] = -x;
    g.x[n - 1 - i] = x;
    g.w[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    g.w[n - 1 - i] = g.w[i];
  }
  cache.emplace_back(n, std::move(g));
  return cache.back().second;
}

/// Chebyshev-weighted mean: evaluates (1/pi) * Int_{c2}^{c1} g(c) /
/// sqrt((c1-c)(c-c2)) dc as the plain average of g at Gauss-Chebyshev nodes.
template <class F>
double gauss_chebyshev_mean(F&& g, double c_lo, double c_hi, int n) {
  const double mid = 0.5 * (c_hi + c_lo);
  const double half = 0.5 * (c_hi - c_lo);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = mid + half * std::cos((2.0 * i + 1.0) * kPi / (2.0 * n));
    acc += g(c);
  }
  return acc / n;
}

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// ln Gamma(x) for x > 0 (Lanczos, g = 7).
inline double ln_gamma(double x) {
  static constexpr std::array<double, 9> c = {
      0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
      771.32342877765313,   -176.61502916214059, 12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (!(x > 0.0)) throw std::domain_error("ln_gamma requires x > 0");
  if (x < 0.5) {
    // reflection
    return std::log(kPi / std::sin(kPi * x)) - ln_gamma(1.0 - x);
  }
  const double z = x - 1.0;
  double a = c[0];
  for (int i = 1; i < 9; ++i) a += c[i] / (z + i);
  const double t = z + 7.5;
  return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(a);
}

namespace detail {

inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double reg_inc_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("reg_inc_beta requires a, b > 0");
  if (x < 0.0 || x > 1.0) throw std::domain_error("reg_inc_beta requires x in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double lbeta = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b);
  const double front = std::exp(lbeta + a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * detail::betacf(a, b, x) / a;
  return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

/// Regularized upper incomplete gamma Q(s, x) = Gamma(s, x) / Gamma(s).
inline double reg_gamma_q(double s, double x) {
  if (!(s > 0.0)) throw std::domain_error("reg_gamma_q requires s > 0");
  if (x < 0.0) throw std::domain_error("reg_gamma_q requires x >= 0");
  if (x == 0.0) return 1.0;
  if (x < s + 1.0) {
    // series for P(s, x)
    double term = 1.0 / s;
    double sum = term;
    double ap = s;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16)
        return 1.0 - sum * std::exp(-x + s * std::log(x) - ln_gamma(s));
    }
    throw NumericError("incomplete gamma series did not converge");
  }
  // Lentz continued fraction for Q(s, x)
  constexpr double kFpMin = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16)
      return h * std::exp(-x + s * std::log(x) - ln_gamma(s));
  }
  throw NumericError("incomplete gamma continued fraction did not converge");
}

/// Upper incomplete gamma Gamma(s, x) (non-regularized).
inline double upper_inc_gamma(double s, double x) {
  return reg_gamma_q(s, x) * std::exp(ln_gamma(s));
}

// ---------------------------------------------------------------------------
// Monotone (shape-preserving) cubic interpolation, Fritsch-Carlson
// ---------------------------------------------------------------------------

class Pchip {
 public:
  Pchip() = default;

  Pchip(std::vector<double> xs, std::vector<double> ys)
      : x_(std::move(xs)), y_(std::move(ys)) {
    const size_t n = x_.size();
    if (n < 2 || y_.size() != n)
      throw NumericError("Pchip needs >= 2 matching knots");
    m_.assign(n, 0.0);
    std::vector<double> d(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) {
      const double h = x_[i + 1] - x_[i];
      if (!(h > 0.0)) throw NumericError("Pchip knots must be increasing");
      d[i] = (y_[i + 1] - y_[i]) / h;
    }
    m_[0] = d[0];
    m_[n - 1] = d[n - 2];
    for (size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] * d[i] <= 0.0) {
        m_[i] = 0.0;
      } else {
        const double h0 = x_[i] - x_[i - 1];
        const double h1 = x_[i + 1] - x_[i];
        const double w1 = 2.0 * h1 + h0;
        const double w2 = h1 + 2.0 * h0;
        m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
      }
    }
  }

  double operator()(double x) const {
    const size_t n = x_.size();
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    size_t i = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin() - 1;
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[i] + h * h10 * m_[i] + h01 * y_[i + 1] + h * h11 * m_[i + 1];
  }

  bool empty() const { return x_.empty(); }
  double x_front() const { return x_.front(); }
  double x_back() const { return x_.back(); }

 private:
  std::vector<double> x_, y_, m_;
};

}  // namespace uavmeta::num
