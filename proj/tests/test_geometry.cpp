#include <gtest/gtest.h>

#include <cmath>

#include "uavmeta/geometry.hpp"

using namespace uavmeta;

namespace {
NetworkConfig defaults() { return NetworkConfig::urban_defaults(); }
}  // namespace

TEST(IntensityMeasure, TerrestrialClosedForm) {
  const NetworkConfig cfg = defaults();
  EXPECT_DOUBLE_EQ(intensity_measure(cfg, Tier::tbs, cfg.h_b), 0.0);
  EXPECT_NEAR(intensity_measure(cfg, Tier::tbs, 1000.0), 15.701680082641788,
              1e-10);
}

TEST(IntensityMeasure, UavTiersSumToUnthinnedDisk) {
  const NetworkConfig cfg = defaults();
  for (double r : {150.0, 400.0, 1200.0}) {
    const double lhs = intensity_measure(cfg, Tier::los_uav, r) +
                       intensity_measure(cfg, Tier::nlos_uav, r);
    const double rhs = num::kPi * cfg.lambda_u * (r * r - cfg.h_u * cfg.h_u);
    EXPECT_NEAR(lhs, rhs, 1e-9 * rhs);
  }
}

TEST(IntensityMeasure, CachedMatchesDirectTo1e8) {
  const NetworkConfig cfg = defaults();
  Geometry g(cfg);
  for (Tier k : {Tier::los_uav, Tier::nlos_uav}) {
    for (double r : {101.0, 137.0, 543.2, 2048.0, 3.3e4, 2.0e7}) {
      const double direct = intensity_measure(cfg, k, r);
      const double cached = g.measure(k, r);
      EXPECT_NEAR(cached, direct, 1e-8 * std::max(direct, 1e-12))
          << tier_name(k) << " r=" << r;
    }
  }
}

TEST(IntensityMeasure, MonotoneAndZeroBelowAltitude) {
  const NetworkConfig cfg = defaults();
  Geometry g(cfg);
  EXPECT_DOUBLE_EQ(g.measure(Tier::los_uav, 50.0), 0.0);
  double prev = 0.0;
  for (double r = 100.0; r < 1e5; r *= 1.4) {
    const double v = g.measure(Tier::los_uav, r);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(MinDistance, VoidAtAltitudeAndMedian) {
  const NetworkConfig cfg = defaults();
  EXPECT_DOUBLE_EQ(min_distance_cdf(cfg, Tier::tbs, cfg.h_b), 0.0);
  EXPECT_NEAR(min_distance_cdf(cfg, Tier::tbs, 211.01450194365864), 0.5, 1e-10);
}

TEST(MinDistance, PdfIntegratesToTotalMass) {
  const NetworkConfig cfg = defaults();
  auto f = [&](double r) { return min_distance_pdf(cfg, Tier::tbs, r); };
  num::QuadratureSpec spec;
  spec.abs_tol = 1e-10;
  const double total =
      num::integrate_adaptive(f, cfg.h_b, 2000.0, spec).value;
  EXPECT_NEAR(total, 1.0, 1e-8);  // terrestrial tier: proper distribution
}

TEST(PowerMatch, IdentityAndDefiningProperty) {
  const NetworkConfig cfg = defaults();
  Geometry g(cfg);
  EXPECT_DOUBLE_EQ(g.chi(Tier::los_uav, Tier::los_uav, 341.0), 341.0);
  for (Tier k : kTiers) {
    for (Tier l : kTiers) {
      for (double r : {1.2 * cfg.altitude(k), 300.0, 900.0}) {
        const double x = g.chi(k, l, r);
        if (x > cfg.altitude(l) * 1.0000001) {
          EXPECT_NEAR(serving_power(cfg, l, x), serving_power(cfg, k, r),
                      1e-10 * serving_power(cfg, k, r))
              << tier_name(k) << "->" << tier_name(l) << " r=" << r;
        }
      }
    }
  }
}

TEST(PowerMatch, IsotropicClosedForm) {
  // SA with kappa = 1, equal powers: chi_{L,N} solves kappa_N chi^-a_N =
  // kappa_L r^-a_L, i.e. chi = r^(a_L/a_N)
  NetworkConfig cfg = defaults();
  cfg.mode = AntennaMode::steerable;
  Geometry g(cfg);
  const double al = cfg.tier(Tier::los_uav).alpha;
  const double an = cfg.tier(Tier::nlos_uav).alpha;
  // below the matching point the radius clamps at the tier altitude
  EXPECT_DOUBLE_EQ(g.chi(Tier::los_uav, Tier::nlos_uav, 200.0), cfg.h_u);
  for (double r : {2000.0, 8000.0, 50000.0}) {
    const double expected = std::pow(r, al / an);
    ASSERT_GT(expected, cfg.h_u);
    EXPECT_NEAR(g.chi(Tier::los_uav, Tier::nlos_uav, r), expected,
                1e-10 * expected);
  }
}

TEST(PowerMatch, MonotoneInDistance) {
  const NetworkConfig cfg = defaults();
  Geometry g(cfg);
  for (Tier k : kTiers)
    for (Tier l : kTiers) {
      double prev = 0.0;
      for (double r = cfg.altitude(k) * 1.01; r < 1e4; r *= 1.3) {
        const double x = g.chi(k, l, r);
        EXPECT_GE(x, prev - 1e-9);
        prev = x;
      }
    }
}

TEST(PowerMatch, CcdfFactorsMatchMinDistanceCdf) {
  const NetworkConfig cfg = defaults();
  Geometry g(cfg);
  for (double y : {150.0, 420.0}) {
    for (Tier l : kTiers) {
      const double x = g.chi(Tier::los_uav, l, y);
      const double ccdf_direct = 1.0 - min_distance_cdf(cfg, l, x);
      EXPECT_NEAR(std::exp(-g.measure(l, x)), ccdf_direct,
                  1e-10 * std::max(ccdf_direct, 1e-30));
    }
  }
}

TEST(Association, SumsToOneBothModes) {
  for (AntennaMode mode : {AntennaMode::steerable, AntennaMode::vertical}) {
    NetworkConfig cfg = defaults();
    cfg.mode = mode;
    const AssociationResult a = association_probabilities(cfg);
    EXPECT_NEAR(a.sum(), 1.0, 1e-6);
    for (Tier k : kTiers) {
      EXPECT_GE(a[k], 0.0);
      EXPECT_LE(a[k], 1.0);
    }
  }
}

TEST(Association, NoUavsMeansTerrestrial) {
  NetworkConfig cfg = defaults();
  cfg.lambda_u = 1e-12 * 1e-6;  // 1e-12 per km^2
  const AssociationResult a = association_probabilities(cfg);
  EXPECT_NEAR(a[Tier::tbs], 1.0, 1e-6);
}

TEST(Association, InvariantUnderJointPowerRescale) {
  NetworkConfig cfg = defaults();
  const AssociationResult a = association_probabilities(cfg);
  cfg.p_b *= 37.0;
  cfg.p_u *= 37.0;
  const AssociationResult b = association_probabilities(cfg);
  for (Tier k : kTiers) EXPECT_NEAR(a[k], b[k], 1e-8);
}

TEST(Association, MonotoneCouplingInUavDensity) {
  double prev_uav = -1.0;
  for (double lam_km2 : {5.0, 20.0, 80.0, 320.0}) {
    NetworkConfig cfg = defaults();
    cfg.lambda_u = lam_km2 * 1e-6;
    const AssociationResult a = association_probabilities(cfg);
    const double uav = a[Tier::los_uav] + a[Tier::nlos_uav];
    EXPECT_GE(uav, prev_uav - 1e-7);
    prev_uav = uav;
  }
}

TEST(ServingDistance, NormalizationAndSupport) {
  const NetworkConfig cfg = defaults();
  Geometry g(cfg);
  for (Tier k : kTiers) {
    if (g.association()[k] < 1e-9) continue;
    EXPECT_DOUBLE_EQ(g.serving_pdf(k, 0.5 * cfg.altitude(k)), 0.0);
    auto f = [&](double y) { return g.serving_pdf(k, y); };
    num::QuadratureSpec spec;
    spec.abs_tol = 1e-9;
    const double total =
        num::integrate_adaptive(f, cfg.altitude(k), g.r_max(k), spec).value;
    EXPECT_NEAR(total, 1.0, 1e-6) << tier_name(k);
  }
}

TEST(ServingDistance, UndefinedWhenTierNeverWins) {
  const NetworkConfig cfg = defaults();
  Geometry g(cfg);
  if (g.association()[Tier::nlos_uav] <= 0.0)
    EXPECT_THROW(g.serving_pdf(Tier::nlos_uav, 200.0), std::domain_error);
}

TEST(Mixture, MassAndQuantiles) {
  const NetworkConfig cfg = defaults();
  Geometry g(cfg);
  ASSERT_TRUE(g.has_uav_mixture());
  double mass = 0.0;
  for (double w : g.mixture_weights()) mass += w;
  EXPECT_NEAR(mass, 1.0, 1e-9);
  EXPECT_GE(g.mixture_quantile(0.0), cfg.h_u);
  EXPECT_LE(g.mixture_quantile(0.5), g.mixture_quantile(0.9));
  // quantile inverts the CDF built from the nodes
  const double y50 = g.mixture_quantile(0.5);
  double below = 0.0;
  const auto& ys = g.mixture_nodes();
  const auto& ws = g.mixture_weights();
  for (size_t i = 0; i < ys.size(); ++i)
    if (ys[i] <= y50) below += ws[i];
  EXPECT_NEAR(below, 0.5, 0.01);
}

TEST(Asymptotic, UavDensityLimit) {
  const NetworkConfig cfg = defaults();
  const AssociationResult lim =
      asymptotic_association(cfg, DensityLimit::lambda_u_inf);
  EXPECT_DOUBLE_EQ(lim[Tier::nlos_uav], 0.0);
  EXPECT_NEAR(lim.sum(), 1.0, 1e-12);
  // finite-density association at 1e4 / km^2 approaches the limit
  NetworkConfig dense = cfg;
  dense.lambda_u = 1e4 * 1e-6;
  const AssociationResult fin = association_probabilities(dense);
  for (Tier k : kTiers) EXPECT_NEAR(fin[k], lim[k], 0.02) << tier_name(k);
}

TEST(Asymptotic, TbsDominanceGivesOne) {
  NetworkConfig cfg = defaults();
  cfg.p_b = 1e9;  // dominance condition holds easily
  const AssociationResult lim =
      asymptotic_association(cfg, DensityLimit::lambda_b_inf);
  EXPECT_NEAR(lim[Tier::tbs], 1.0, 1e-12);
}

TEST(Asymptotic, TbsLimitPartitions) {
  const NetworkConfig cfg = defaults();
  const AssociationResult lim =
      asymptotic_association(cfg, DensityLimit::lambda_b_inf);
  EXPECT_NEAR(lim.sum(), 1.0, 1e-6);
  EXPECT_GT(lim[Tier::tbs], 0.0);
}

TEST(Geometry, RidgeOfTruncationRadii) {
  const NetworkConfig cfg = defaults();
  Geometry g(cfg);
  for (Tier k : kTiers) {
    EXPECT_GT(g.r_max(k), cfg.altitude(k));
    EXPECT_LE(g.r_max(k), 1e6);
    // the void probability at the truncation radius is negligible
    EXPECT_LT(std::exp(-g.void_exponent(k, g.r_max(k))), 1e-12);
  }
}

TEST(Geometry, DistanceProcessWrapper) {
  const NetworkConfig cfg = defaults();
  DistanceProcess dp{&cfg, Tier::los_uav};
  EXPECT_DOUBLE_EQ(dp.intensity(90.0), 0.0);
  EXPECT_GT(dp.intensity(150.0), 0.0);
  EXPECT_NEAR(dp.measure(400.0), intensity_measure(cfg, Tier::los_uav, 400.0),
              1e-12);
}
