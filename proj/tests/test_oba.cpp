#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "uavmeta/oba.hpp"
#include "uavmeta/rng.hpp"

using namespace uavmeta;

namespace {

NetworkConfig defaults() { return NetworkConfig::urban_defaults(); }

/// Sample Theta by the law-of-cosines construction with a uniform azimuth.
double draw_theta(double h, double l, double t, double alpha) {
  const double h2 = h * h;
  const double d = std::sqrt((h2 + l * l) * (h2 + t * t));
  return std::acos(std::clamp((h2 - l * t * std::cos(alpha)) / d, -1.0, 1.0));
}

double ks_distance(std::vector<double>& samples,
                   const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  double ks = 0.0;
  const double n = double(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    ks = std::max(ks, std::fabs((i + 1) / n - f));
    ks = std::max(ks, std::fabs(i / n - f));
  }
  return ks;
}

}  // namespace

TEST(ObaBounds, DegenerateCases) {
  const double h = 100.0;
  const ObaSupport a = oba_bounds(h, 70.0, 0.0);
  EXPECT_TRUE(a.degenerate);
  EXPECT_DOUBLE_EQ(a.theta_min, std::atan(70.0 / h));
  EXPECT_DOUBLE_EQ(a.theta_max, a.theta_min);
  const ObaSupport b = oba_bounds(h, 0.0, 45.0);
  EXPECT_DOUBLE_EQ(b.theta_min, std::atan(45.0 / h));
  const ObaSupport c = oba_bounds(h, h, h);
  EXPECT_NEAR(c.theta_min, 0.0, 1e-12);
  EXPECT_NEAR(c.theta_max, num::kPi / 2.0, 1e-12);
  EXPECT_THROW(oba_bounds(0.0, 1.0, 1.0), std::domain_error);
  EXPECT_THROW(oba_bounds(10.0, -1.0, 1.0), std::domain_error);
}

TEST(ObaGivenLt, CdfEndpointsAndInterior) {
  const double h = 100.0, l = 150.0, t = 80.0;
  const ObaSupport s = oba_bounds(h, l, t);
  EXPECT_DOUBLE_EQ(oba_cdf_given_lt(h, l, t, s.theta_min), 0.0);
  EXPECT_DOUBLE_EQ(oba_cdf_given_lt(h, l, t, s.theta_max), 1.0);
  EXPECT_NEAR(oba_cdf_given_lt(h, l, t, s.theta_max - 1e-9), 1.0, 1e-3);
  EXPECT_NEAR(oba_cdf_given_lt(h, l, t, s.theta_min + 1e-9), 0.0, 1e-3);
  // CDF from integrating the PDF over the interior matches the closed form
  const double a = s.theta_min + 0.05 * (s.theta_max - s.theta_min);
  const double b = s.theta_min + 0.7 * (s.theta_max - s.theta_min);
  auto f = [&](double th) { return oba_pdf_given_lt(h, l, t, th); };
  num::QuadratureSpec spec;
  spec.abs_tol = 1e-11;
  const double integral = num::integrate_adaptive(f, a, b, spec).value;
  EXPECT_NEAR(integral,
              oba_cdf_given_lt(h, l, t, b) - oba_cdf_given_lt(h, l, t, a),
              1e-8);
}

TEST(ObaGivenLt, NormalizationViaChebyshevRule) {
  // pdf * pi * sqrt((c1-c)(c-c2)) / sin(theta) == 1 on the support, so the
  // Gauss-Chebyshev mean of that ratio recovers the (unit) normalization
  const double h = 100.0, l = 150.0, t = 80.0;
  const ObaSupport s = oba_bounds(h, l, t);
  const double c1 = std::cos(s.theta_min), c2 = std::cos(s.theta_max);
  const double norm = num::gauss_chebyshev_mean(
      [&](double c) {
        const double th = std::acos(std::clamp(c, -1.0, 1.0));
        const double w = (c1 - c) * (c - c2);
        return oba_pdf_given_lt(h, l, t, th) * num::kPi * std::sqrt(w) /
               std::sin(th);
      },
      c2, c1, 256);
  EXPECT_NEAR(norm, 1.0, 1e-8);
}

TEST(ObaGivenLt, SamplingOracleKs) {
  const double h = 100.0;
  rng::Stream rs(2024, 0);
  for (const auto& [l, t] : std::vector<std::pair<double, double>>{
           {150.0, 80.0}, {50.0, 300.0}, {100.0, 100.0}}) {
    std::vector<double> samples(200000);
    for (double& v : samples)
      v = draw_theta(h, l, t, rs.uniform(num::kPi));
    const double ks = ks_distance(
        samples, [&](double th) { return oba_cdf_given_lt(h, l, t, th); });
    EXPECT_LT(ks, 0.005) << "l=" << l << " t=" << t;
    // support bounds agree with the sampled extremes
    const ObaSupport s = oba_bounds(h, l, t);
    EXPECT_NEAR(samples.front(), s.theta_min, 1e-3);
    EXPECT_NEAR(samples.back(), s.theta_max, 1e-3);
  }
}

TEST(ObaGivenL, NormalizationWithinTolerance) {
  const NetworkConfig cfg = defaults();
  Geometry g(cfg);
  for (double l : {30.0, 120.0}) {
    auto f = [&](double th) { return oba_pdf_given_l(g, l, th); };
    num::QuadratureSpec spec;
    spec.abs_tol = 1e-9;
    spec.rel_tol = 1e-8;
    const double total = num::integrate_adaptive(f, 1e-9, num::kPi, spec).value;
    EXPECT_NEAR(total, 1.0, 1e-6) << "l=" << l;
  }
}

TEST(ObaGivenL, CdfEndpoints) {
  const NetworkConfig cfg = defaults();
  Geometry g(cfg);
  EXPECT_NEAR(oba_cdf_given_l(g, 50.0, num::kPi), 1.0, 1e-9);
  EXPECT_NEAR(oba_cdf_given_l(g, 50.0, 0.0), 0.0, 1e-9);
  double prev = 0.0;
  for (double th = 0.0; th <= num::kPi; th += 0.05) {
    const double v = oba_cdf_given_l(g, 50.0, th);
    EXPECT_GE(v, prev - 1e-12);
    prev = v;
  }
}

TEST(ObaGivenL, DoubleSamplingOracleKs) {
  const NetworkConfig cfg = defaults();
  Geometry g(cfg);
  const double l = 50.0;
  rng::Stream rs(77, 1);
  std::vector<double> samples(300000);
  for (double& v : samples) {
    const double y = g.mixture_quantile(rs.uniform());
    const double t = std::sqrt(std::max(y * y - cfg.h_u * cfg.h_u, 0.0));
    v = draw_theta(cfg.h_u, l, t, rs.uniform(num::kPi));
  }
  const double ks =
      ks_distance(samples, [&](double th) { return oba_cdf_given_l(g, l, th); });
  EXPECT_LT(ks, 0.01);
}

TEST(ObaGivenL, LowAltitudeApproachesUniform) {
  NetworkConfig cfg = defaults();
  cfg.h_u = 1.0;
  Geometry g(cfg);
  double sup = 0.0;
  for (double th = 0.05; th < num::kPi; th += 0.05)
    sup = std::max(sup,
                   std::fabs(oba_cdf_given_l(g, 50.0, th) - th / num::kPi));
  EXPECT_LT(sup, 0.05);
}

TEST(ObaGivenL, HighAltitudeConcentratesDownward) {
  NetworkConfig cfg = defaults();
  cfg.h_u = 1000.0;
  Geometry g(cfg);
  const double median = num::bisect_monotone(
      [&](double th) { return oba_cdf_given_l(g, 50.0, th); }, 0.5, 1e-3,
      num::kPi - 1e-3);
  EXPECT_LT(median, num::kPi / 2.0);
}

TEST(MeanGain, VerticalOverheadIsBoresight) {
  NetworkConfig cfg = defaults();
  cfg.mode = AntennaMode::vertical;
  Geometry g(cfg);
  EXPECT_NEAR(mean_interfering_gain(g, cfg.h_u), cfg.uav_antenna.max_gain,
              1e-12);
}

TEST(MeanGain, SteerableStaysWithinPatternRange) {
  const NetworkConfig cfg = defaults();
  Geometry g(cfg);
  for (double r : {100.0, 200.0, 1000.0, 20000.0}) {
    const double v = mean_interfering_gain(g, r);
    EXPECT_GE(v, cfg.uav_antenna.floor_gain());
    EXPECT_LE(v, cfg.uav_antenna.max_gain);
  }
}

TEST(MeanGain, DualQuadratureAgreement) {
  const NetworkConfig cfg = defaults();
  Geometry g(cfg);
  for (double r : {150.0, 400.0}) {
    const double a = mean_interfering_gain(g, r, GainQuadrature::alpha_form);
    const double c = mean_interfering_gain(g, r, GainQuadrature::chebyshev);
    EXPECT_NEAR(a, c, 1e-6 * a) << "r=" << r;
  }
}

TEST(MeanGain, LowAltitudeMatchesUniformBaseline) {
  NetworkConfig cfg = defaults();
  cfg.h_u = 1.0;
  Geometry g(cfg);
  NetworkConfig cfg_u = cfg;
  cfg_u.oba = ObaTreatment::uniform_baseline;
  Geometry gu(cfg_u);
  const double uniform = mean_interfering_gain(gu, 200.0);
  const double exact = mean_interfering_gain(g, 200.0);
  EXPECT_NEAR(exact, uniform, 0.02 * uniform);
}

TEST(GainProfile, InterpolationWithinDeclaredTolerance) {
  const NetworkConfig cfg = defaults();
  Geometry g(cfg);
  GainProfile prof(g);
  // off-grid probes against direct quadrature
  for (double r : {133.7, 517.9, 4321.0, 98765.0}) {
    const double direct = mean_interfering_gain(g, r);
    EXPECT_NEAR(prof(r), direct, 2.0 * GainProfile::kDeclaredTol * direct)
        << "r=" << r;
  }
}

TEST(GainProfile, VerticalIsExact) {
  NetworkConfig cfg = defaults();
  cfg.mode = AntennaMode::vertical;
  Geometry g(cfg);
  GainProfile prof(g);
  for (double r : {100.0, 170.0, 800.0}) {
    const double expected = antenna_gain(
        cfg.uav_antenna, std::acos(std::min(cfg.h_u / r, 1.0)));
    EXPECT_DOUBLE_EQ(prof(r), expected);
  }
}

TEST(GainProfile, UniformBaselineIsConstant) {
  NetworkConfig cfg = defaults();
  cfg.oba = ObaTreatment::uniform_baseline;
  Geometry g(cfg);
  GainProfile prof(g);
  const double v = prof(150.0);
  EXPECT_DOUBLE_EQ(prof(1500.0), v);
  // (1/pi) int G over a 60 degree beamwidth, 20 dB floor
  auto f = [&](double th) { return antenna_gain(cfg.uav_antenna, th); };
  const double direct =
      num::integrate_adaptive(f, 0.0, num::kPi).value / num::kPi;
  EXPECT_NEAR(v, direct, 1e-9);
}

TEST(GainLaw, MeanMatchesProfile) {
  const NetworkConfig cfg = defaults();
  Geometry g(cfg);
  GainProfile prof(g);
  GainLaw law(g);
  for (double r : {120.0, 300.0, 2500.0}) {
    EXPECT_NEAR(law.mean(r), prof(r), 3e-3 * prof(r)) << "r=" << r;
  }
}

TEST(GainLaw, NodesAreSortedAndBounded) {
  const NetworkConfig cfg = defaults();
  Geometry g(cfg);
  GainLaw law(g);
  std::array<double, GainLaw::kNodes> nodes;
  for (double r : {110.0, 640.0, 9000.0}) {
    law.nodes(r, nodes);
    for (int i = 0; i < GainLaw::kNodes; ++i) {
      EXPECT_GE(nodes[i], cfg.uav_antenna.floor_gain() * (1.0 - 1e-9));
      EXPECT_LE(nodes[i], cfg.uav_antenna.max_gain * (1.0 + 1e-9));
      if (i) EXPECT_GE(nodes[i], nodes[i - 1] - 1e-12);
    }
  }
}

TEST(InterferingPower, VerticalEqualsServingForUavTiers) {
  NetworkConfig cfg = defaults();
  cfg.mode = AntennaMode::vertical;
  Analysis an(cfg);
  for (Tier k : {Tier::los_uav, Tier::nlos_uav})
    for (double r : {100.0, 230.0, 1700.0})
      EXPECT_NEAR(an.interfering_power(k, r), serving_power(cfg, k, r),
                  1e-12 * serving_power(cfg, k, r));
}

TEST(InterferingPower, SteerableBelowBoresightAtMinimumDistance) {
  const NetworkConfig cfg = defaults();
  Analysis an(cfg);
  const TierParams& tl = cfg.tier(Tier::los_uav);
  const double boresight = cfg.p_u * cfg.uav_antenna.max_gain * tl.kappa *
                           std::pow(cfg.h_u, -tl.alpha);
  EXPECT_LT(an.interfering_power(Tier::los_uav, cfg.h_u), boresight);
}
