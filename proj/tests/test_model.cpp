#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "uavmeta/channel.hpp"
#include "uavmeta/config.hpp"
#include "uavmeta/configio.hpp"

using namespace uavmeta;

namespace {
NetworkConfig defaults() { return NetworkConfig::urban_defaults(); }
}  // namespace

TEST(Config, UrbanDefaultsValidate) {
  EXPECT_NO_THROW(defaults().validate());
}

TEST(Config, RejectsBadValues) {
  NetworkConfig c = defaults();
  c.lambda_u = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = defaults();
  c.tier(Tier::los_uav).alpha = 2.0;  // interference integrals would diverge
  EXPECT_THROW(c.validate(), ConfigError);
  c = defaults();
  c.tier(Tier::tbs).fading_m = 2;  // terrestrial links are Rayleigh
  EXPECT_THROW(c.validate(), ConfigError);
  c = defaults();
  c.h_u = -5.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, EnvironmentPresetsRoundTripExactly) {
  const struct {
    Environment env;
    double a, b;
  } cases[] = {
      {Environment::suburban(), 4.88, 0.43},
      {Environment::urban(), 9.61, 0.16},
      {Environment::dense_urban(), 11.95, 0.14},
      {Environment::highrise_urban(), 27.23, 0.08},
  };
  for (const auto& c : cases) {
    EXPECT_EQ(c.env.mu_a, c.a);
    EXPECT_EQ(c.env.mu_b, c.b);
    NetworkConfig cfg = defaults();
    cfg.env = c.env;
    std::istringstream in(serialize_config(cfg));
    const NetworkConfig back = config_from_text(ConfigText::parse(in));
    EXPECT_EQ(back.env.mu_a, c.a);
    EXPECT_EQ(back.env.mu_b, c.b);
  }
}

TEST(LosProbability, UrbanValues) {
  const NetworkConfig cfg = defaults();  // h_u = 100
  EXPECT_NEAR(los_probability(cfg, 100.0), 0.999975074537903, 1e-9);
  EXPECT_NEAR(los_probability(cfg, 1e7), 0.021874582595924, 2e-8);
}

TEST(LosProbability, ComplementAndRange) {
  const NetworkConfig cfg = defaults();
  for (double r : {100.0, 150.0, 500.0, 2e3, 1e5}) {
    const double p = los_probability(cfg, r);
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
    EXPECT_DOUBLE_EQ(p + nlos_probability(cfg, r), 1.0);
  }
}

TEST(LosProbability, DecreasingInDistance) {
  const NetworkConfig cfg = defaults();
  double prev = 2.0;
  for (double r = 100.0; r < 1e6; r *= 1.3) {
    const double p = los_probability(cfg, r);
    EXPECT_LT(p, prev);
    prev = p;
  }
}

TEST(LosProbability, DomainError) {
  const NetworkConfig cfg = defaults();
  EXPECT_THROW(los_probability(cfg, 99.0), std::domain_error);
}

TEST(AntennaGain, BoresightAndHalfBeamwidth) {
  const AntennaPattern p = AntennaPattern::from_db(0.0, 60.0, 20.0);
  EXPECT_DOUBLE_EQ(antenna_gain(p, 0.0), p.max_gain);
  EXPECT_NEAR(antenna_gain(p, 0.5 * p.beamwidth_rad),
              p.max_gain * 0.5011872336272722, 1e-12);
}

TEST(AntennaGain, SidelobeFloor) {
  const AntennaPattern p = AntennaPattern::from_db(0.0, 60.0, 20.0);
  const double th_c = sidelobe_angle(p);
  for (double th : {th_c, th_c * 1.2, num::kPi})
    EXPECT_NEAR(antenna_gain(p, th), 0.01 * p.max_gain, 1e-12);
}

TEST(AntennaGain, ContinuousAndNonIncreasing) {
  const AntennaPattern p = AntennaPattern::from_db(3.0, 45.0, 25.0);
  double prev = antenna_gain(p, 0.0);
  for (int i = 1; i <= 2000; ++i) {
    const double th = num::kPi * i / 2000.0;
    const double g = antenna_gain(p, th);
    EXPECT_LE(g, prev + 1e-12);
    EXPECT_GE(g, p.floor_gain() - 1e-15);
    EXPECT_LT(std::fabs(g - prev), 0.02 * p.max_gain);  // no jumps on this grid
    prev = g;
  }
  EXPECT_THROW(antenna_gain(p, -0.1), std::domain_error);
  EXPECT_THROW(antenna_gain(p, num::kPi + 0.1), std::domain_error);
}

TEST(AntennaGain, LiteralExponentSwitch) {
  AntennaPattern p = AntennaPattern::from_db(0.0, 60.0, 20.0);
  p.literal_exponent = true;
  // the literal reading drops the /10: the half-beamwidth point loses 10^-3
  EXPECT_NEAR(antenna_gain(p, 0.5 * p.beamwidth_rad), 1e-3, 1e-15);
}

TEST(ServingPower, MinimumDistanceValues) {
  NetworkConfig cfg = defaults();
  cfg.mode = AntennaMode::steerable;
  const TierParams& tl = cfg.tier(Tier::los_uav);
  const double expected = cfg.p_u * cfg.uav_antenna.max_gain * tl.kappa *
                          std::pow(cfg.h_u, -tl.alpha);
  EXPECT_NEAR(serving_power(cfg, Tier::los_uav, cfg.h_u), expected, 1e-18);
  cfg.mode = AntennaMode::vertical;  // arccos(1) = 0: same value overhead
  EXPECT_NEAR(serving_power(cfg, Tier::los_uav, cfg.h_u), expected, 1e-18);
}

TEST(ServingPower, StrictlyDecreasing) {
  for (AntennaMode mode : {AntennaMode::steerable, AntennaMode::vertical}) {
    NetworkConfig cfg = defaults();
    cfg.mode = mode;
    for (Tier k : kTiers) {
      double prev = serving_power(cfg, k, cfg.altitude(k));
      for (double r = cfg.altitude(k) * 1.02; r < 1e5; r *= 1.07) {
        const double v = serving_power(cfg, k, r);
        EXPECT_LT(v, prev) << tier_name(k) << " mode " << mode_name(mode);
        prev = v;
      }
    }
  }
}

TEST(ServingPower, IsotropicReductionIsExact) {
  NetworkConfig cfg = defaults();
  cfg.tbs_antenna.sidelobe_db = 0.0;
  cfg.uav_antenna.sidelobe_db = 0.0;
  cfg.mode = AntennaMode::vertical;
  for (Tier k : kTiers) {
    const TierParams& tp = cfg.tier(k);
    const double p = k == Tier::tbs ? cfg.p_b : cfg.p_u;
    const double g = k == Tier::tbs ? cfg.tbs_antenna.max_gain
                                    : cfg.uav_antenna.max_gain;
    for (double r : {150.0, 431.0, 2000.0}) {
      EXPECT_DOUBLE_EQ(serving_power(cfg, k, r),
                       p * g * tp.kappa * std::pow(r, -tp.alpha));
    }
  }
}

TEST(ServingPower, PureFunction) {
  const NetworkConfig cfg = defaults();
  const double a = serving_power(cfg, Tier::tbs, 312.7);
  const double b = serving_power(cfg, Tier::tbs, 312.7);
  EXPECT_EQ(a, b);
}

TEST(FadingMgf, Values) {
  EXPECT_DOUBLE_EQ(fading_mgf(3, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(fading_mgf(1, 1.0), 0.5);
  EXPECT_NEAR(fading_mgf(10000, 1.0), std::exp(-1.0), 1e-3);
  EXPECT_THROW(fading_mgf(1, -0.5), std::domain_error);
  EXPECT_THROW(fading_mgf(0, 1.0), std::domain_error);
}

TEST(ConfigIo, UnknownKeyRejectedWithPath) {
  std::istringstream in("uav.altitude_m = 120\nuav.altidude_m = 7\n");
  try {
    config_from_text(ConfigText::parse(in));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("uav.altidude_m"), std::string::npos);
  }
}

TEST(ConfigIo, UnitsConvertAtBoundary) {
  std::istringstream in(
      "tbs.density_per_km2 = 5\n"
      "uav.max_gain_db = 3\n"
      "uav.beamwidth_deg = 60\n"
      "uav.antenna_mode = va\n");
  const NetworkConfig cfg = config_from_text(ConfigText::parse(in));
  EXPECT_DOUBLE_EQ(cfg.lambda_b, 5e-6);
  EXPECT_NEAR(cfg.uav_antenna.max_gain, std::pow(10.0, 0.3), 1e-12);
  EXPECT_NEAR(cfg.uav_antenna.beamwidth_rad, num::kPi / 3.0, 1e-12);
  EXPECT_EQ(cfg.mode, AntennaMode::vertical);
}

TEST(ConfigIo, FullRoundTrip) {
  NetworkConfig cfg = defaults();
  cfg.h_u = 137.5;
  cfg.lambda_u = 33e-6;
  cfg.mode = AntennaMode::vertical;
  cfg.oba = ObaTreatment::uniform_baseline;
  cfg.tier(Tier::nlos_uav).alpha = 3.7;
  std::istringstream in(serialize_config(cfg));
  const NetworkConfig back = config_from_text(ConfigText::parse(in));
  EXPECT_EQ(serialize_config(back), serialize_config(cfg));
  EXPECT_EQ(config_hash(back), config_hash(cfg));
  EXPECT_EQ(back.lambda_u, cfg.lambda_u);
  EXPECT_EQ(back.uav_antenna.beamwidth_rad, cfg.uav_antenna.beamwidth_rad);
}
