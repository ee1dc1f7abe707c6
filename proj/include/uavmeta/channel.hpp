#pragma once

// Pointwise channel functions: LoS probability, antenna gain, average
// serving power, fading MGF. All pure; distances are 3D link distances in m.

#include <cmath>
#include <stdexcept>

#include "uavmeta/config.hpp"
#include "uavmeta/numerics.hpp"

namespace uavmeta {

/// LoS probability of an air-to-ground link with 3D distance r >= h_u.
inline double los_probability(const NetworkConfig& cfg, double r) {
  if (!(r >= cfg.h_u))
    throw std::domain_error("los_probability requires r >= h_u");
  const double elev_deg = (180.0 / num::kPi) * std::asin(std::min(cfg.h_u / r, 1.0));
  return 1.0 / (1.0 + cfg.env.mu_a *
                          std::exp(-cfg.env.mu_b * (elev_deg - cfg.env.mu_a)));
}

inline double nlos_probability(const NetworkConfig& cfg, double r) {
  return 1.0 - los_probability(cfg, r);
}

/// Gain at angle theta off boresight. Quadratic attenuation in dB capped at
/// the sidelobe limit; the 3 dB beamwidth yields exactly 3 dB loss.
inline double antenna_gain(const AntennaPattern& p, double theta) {
  if (!(theta >= 0.0) || !(theta <= num::kPi + 1e-12))
    throw std::domain_error("antenna_gain requires theta in [0, pi]");
  const double a_db =
      std::min(12.0 * (theta / p.beamwidth_rad) * (theta / p.beamwidth_rad),
               p.sidelobe_db);
  const double scale = p.literal_exponent ? 1.0 : 0.1;
  return p.max_gain * std::pow(10.0, -a_db * scale);
}

/// Off-boresight angle beyond which the pattern sits on its sidelobe floor.
inline double sidelobe_angle(const AntennaPattern& p) {
  return p.beamwidth_rad * std::sqrt(p.sidelobe_db / 12.0);
}

/// Average power received from a serving transmitter of tier k at 3D
/// distance r. TBS boresight points straight down, so its off-boresight
/// angle toward the user is arccos(h_b / r); steerable UAVs track the user
/// (boresight gain), vertical UAVs see arccos(h_u / r).
inline double serving_power(const NetworkConfig& cfg, Tier k, double r) {
  const double alt = cfg.altitude(k);
  if (!(r >= alt * (1.0 - 1e-12)))
    throw std::domain_error("serving_power requires r >= tier altitude");
  r = std::max(r, alt);
  const TierParams& tp = cfg.tier(k);
  double g;
  if (k == Tier::tbs) {
    g = antenna_gain(cfg.tbs_antenna, std::acos(std::min(cfg.h_b / r, 1.0)));
    return cfg.p_b * g * tp.kappa * std::pow(r, -tp.alpha);
  }
  if (cfg.mode == AntennaMode::steerable)
    g = cfg.uav_antenna.max_gain;
  else
    g = antenna_gain(cfg.uav_antenna, std::acos(std::min(cfg.h_u / r, 1.0)));
  return cfg.p_u * g * tp.kappa * std::pow(r, -tp.alpha);
}

/// MGF of the normalized Gamma fading at -s: E[exp(-s H)] = (1+s/m)^(-m).
inline double fading_mgf(int m_fading, double s) {
  if (m_fading < 1) throw std::domain_error("fading_mgf requires m >= 1");
  if (!(s >= 0.0)) throw std::domain_error("fading_mgf requires s >= 0");
  return std::exp(-m_fading * std::log1p(s / m_fading));
}

}  // namespace uavmeta
