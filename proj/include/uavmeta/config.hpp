#pragma once

// Scenario description: tier densities/altitudes/powers, antenna patterns,
// propagation environment, fading orders, and the UAV antenna mode.
// All quantities are stored in SI base units (m, m^-2, W) and linear gains;
// the CLI layer converts from km^-2 / dB / degrees at the boundary.

#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include "uavmeta/errors.hpp"

namespace uavmeta {

/// Link condition of a transmitter as seen from the typical user.
enum class Tier : int { tbs = 0, los_uav = 1, nlos_uav = 2 };

inline constexpr std::array<Tier, 3> kTiers = {Tier::tbs, Tier::los_uav,
                                               Tier::nlos_uav};

inline constexpr int tier_index(Tier t) { return static_cast<int>(t); }

inline const char* tier_name(Tier t) {
  switch (t) {
    case Tier::tbs: return "tbs";
    case Tier::los_uav: return "los";
    case Tier::nlos_uav: return "nlos";
  }
  return "?";
}

/// UAV antenna steering: beam tracks the served user (steerable) or points
/// straight down (vertical).
enum class AntennaMode { steerable, vertical };

inline const char* mode_name(AntennaMode m) {
  return m == AntennaMode::steerable ? "sa" : "va";
}

/// Treatment of the interfering UAVs' off-boresight angle in the analysis:
/// the exact distance-dependent law, or the flat Uniform(0, pi) baseline.
enum class ObaTreatment { exact, uniform_baseline };

/// Sigmoid parameters of the air-to-ground LoS probability.
struct Environment {
  double mu_a = 9.61;
  double mu_b = 0.16;

  static Environment suburban() { return {4.88, 0.43}; }
  static Environment urban() { return {9.61, 0.16}; }
  static Environment dense_urban() { return {11.95, 0.14}; }
  static Environment highrise_urban() { return {27.23, 0.08}; }
};

/// Directional antenna: quadratic attenuation in dB up to a sidelobe floor.
struct AntennaPattern {
  double max_gain = 1.0;        // linear
  double beamwidth_rad = 0.0;   // 3 dB beamwidth
  double sidelobe_db = 20.0;    // attenuation limit in dB
  /// When set, the attenuation exponent is applied without the /10 dB
  /// conversion (the literal reading of the pattern formula); off by default.
  bool literal_exponent = false;

  static AntennaPattern from_db(double max_gain_db, double beamwidth_deg,
                                double sidelobe_db) {
    AntennaPattern p;
    p.max_gain = std::pow(10.0, max_gain_db / 10.0);
    p.beamwidth_rad = beamwidth_deg * (3.14159265358979323846 / 180.0);
    p.sidelobe_db = sidelobe_db;
    return p;
  }

  double floor_gain() const {
    const double scale = literal_exponent ? 1.0 : 0.1;
    return max_gain * std::pow(10.0, -sidelobe_db * scale);
  }
};

/// Per-tier propagation: power-law path loss and Nakagami fading order.
struct TierParams {
  double alpha = 3.0;  // path-loss exponent, must exceed 2
  double kappa = 1.0;  // path-loss intercept
  int fading_m = 1;    // Nakagami shape (1 = Rayleigh)
};

struct NetworkConfig {
  double lambda_b = 5e-6;   // TBS density, per m^2
  double lambda_u = 20e-6;  // UAV density, per m^2
  double h_b = 20.0;        // TBS altitude, m
  double h_u = 100.0;       // UAV altitude, m
  double p_b = 30.0;        // TBS transmit power, W
  double p_u = 10.0;        // UAV transmit power, W
  double n0 = 1e-8;         // noise power, W
  Environment env;
  AntennaPattern tbs_antenna;
  AntennaPattern uav_antenna;
  std::array<TierParams, 3> tiers;  // indexed by Tier
  AntennaMode mode = AntennaMode::steerable;
  ObaTreatment oba = ObaTreatment::exact;

  const TierParams& tier(Tier t) const { return tiers[tier_index(t)]; }
  TierParams& tier(Tier t) { return tiers[tier_index(t)]; }

  double altitude(Tier t) const { return t == Tier::tbs ? h_b : h_u; }

  /// Deployment of Sec. V: urban environment, 160/60 degree beamwidths,
  /// 0 dB maximum gains, 20 dB sidelobe floor.
  static NetworkConfig urban_defaults() {
    NetworkConfig c;
    c.env = Environment::urban();
    c.tbs_antenna = AntennaPattern::from_db(0.0, 160.0, 20.0);
    c.uav_antenna = AntennaPattern::from_db(0.0, 60.0, 20.0);
    c.tier(Tier::tbs) = {3.0, 1.0, 1};
    c.tier(Tier::los_uav) = {2.5, 1.0, 3};
    c.tier(Tier::nlos_uav) = {4.0, 1.0, 2};
    return c;
  }

  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (!(lambda_b > 0.0) || !(lambda_u > 0.0)) fail("densities must be > 0");
    if (!(h_b > 0.0) || !(h_u > 0.0)) fail("altitudes must be > 0");
    if (!(p_b > 0.0) || !(p_u > 0.0)) fail("transmit powers must be > 0");
    if (!(n0 >= 0.0)) fail("noise power must be >= 0");
    if (!(env.mu_a > 0.0) || !(env.mu_b > 0.0))
      fail("environment parameters must be > 0");
    for (const AntennaPattern* p : {&tbs_antenna, &uav_antenna}) {
      if (!(p->max_gain > 0.0)) fail("antenna max gain must be > 0");
      if (!(p->beamwidth_rad > 0.0) ||
          !(p->beamwidth_rad <= 3.14159265358979323846))
        fail("beamwidth must be in (0, pi]");
      if (!(p->sidelobe_db >= 0.0)) fail("sidelobe attenuation must be >= 0");
    }
    for (Tier t : kTiers) {
      const TierParams& tp = tier(t);
      std::ostringstream name;
      name << "tier " << tier_name(t);
      if (!(tp.alpha > 2.0))
        fail(name.str() + ": path-loss exponent must exceed 2");
      if (!(tp.kappa > 0.0)) fail(name.str() + ": intercept must be > 0");
      if (tp.fading_m < 1) fail(name.str() + ": fading order must be >= 1");
    }
    if (tier(Tier::tbs).fading_m != 1)
      fail("terrestrial links are Rayleigh: tier tbs fading order must be 1");
  }
};

}  // namespace uavmeta
