#pragma once

// Human-editable scenario files: flat dotted keys, `key = value` lines,
// '#' comments. Densities are given per km^2, gains in dB, beamwidths in
// degrees; conversion to internal SI/linear units happens here, once.
//
//   env.preset = urban            # or env.mu_a / env.mu_b explicitly
//   tbs.density_per_km2 = 5
//   uav.altitude_m = 100
//   tier.los.alpha = 2.5
//   uav.antenna_mode = sa         # sa | va
//   oba.treatment = exact         # exact | uniform
//
// Unknown keys are rejected with the offending path.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "uavmeta/config.hpp"
#include "uavmeta/errors.hpp"

namespace uavmeta {

inline constexpr double kDegPerRad = 180.0 / 3.14159265358979323846;

namespace detail_io {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double to_number(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("config key '" + key + "': not a boolean: '" + v + "'");
}

inline double gain_db(const AntennaPattern& p) {
  return 10.0 * std::log10(p.max_gain);
}

}  // namespace detail_io

/// Parsed key/value view of a config file (tolerates extra non-config keys
/// only if `strict` is off; the CLI keeps sweep.* keys separate).
struct ConfigText {
  std::map<std::string, std::string> values;

  static ConfigText parse(std::istream& in) {
    ConfigText out;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail_io::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        std::ostringstream msg;
        msg << "config line " << lineno << ": expected 'key = value'";
        throw ConfigError(msg.str());
      }
      const std::string key = detail_io::trim(line.substr(0, eq));
      const std::string val = detail_io::trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError("config: empty key");
      out.values[key] = val;
    }
    return out;
  }

  static ConfigText parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse(in);
  }
};

/// Applies one config key to the scenario. Returns false for unknown keys.
inline bool apply_config_key(NetworkConfig& cfg, const std::string& key,
                             const std::string& val) {
  using detail_io::to_bool;
  using detail_io::to_number;
  auto num = [&] { return to_number(key, val); };

  if (key == "env.preset") {
    if (val == "suburban") cfg.env = Environment::suburban();
    else if (val == "urban") cfg.env = Environment::urban();
    else if (val == "dense_urban") cfg.env = Environment::dense_urban();
    else if (val == "highrise_urban") cfg.env = Environment::highrise_urban();
    else throw ConfigError("env.preset: unknown preset '" + val + "'");
    return true;
  }
  if (key == "env.mu_a") { cfg.env.mu_a = num(); return true; }
  if (key == "env.mu_b") { cfg.env.mu_b = num(); return true; }
  if (key == "noise_w") { cfg.n0 = num(); return true; }

  if (key == "tbs.density_per_km2") { cfg.lambda_b = num() * 1e-6; return true; }
  if (key == "tbs.altitude_m") { cfg.h_b = num(); return true; }
  if (key == "tbs.power_w") { cfg.p_b = num(); return true; }
  if (key == "tbs.max_gain_db") {
    cfg.tbs_antenna.max_gain = std::pow(10.0, num() / 10.0);
    return true;
  }
  if (key == "tbs.beamwidth_deg") {
    cfg.tbs_antenna.beamwidth_rad = num() / kDegPerRad;
    return true;
  }
  if (key == "tbs.sla_db") { cfg.tbs_antenna.sidelobe_db = num(); return true; }

  if (key == "uav.density_per_km2") { cfg.lambda_u = num() * 1e-6; return true; }
  if (key == "uav.altitude_m") { cfg.h_u = num(); return true; }
  if (key == "uav.power_w") { cfg.p_u = num(); return true; }
  if (key == "uav.max_gain_db") {
    cfg.uav_antenna.max_gain = std::pow(10.0, num() / 10.0);
    return true;
  }
  if (key == "uav.beamwidth_deg") {
    cfg.uav_antenna.beamwidth_rad = num() / kDegPerRad;
    return true;
  }
  if (key == "uav.sla_db") { cfg.uav_antenna.sidelobe_db = num(); return true; }
  if (key == "uav.antenna_mode") {
    if (val == "sa") cfg.mode = AntennaMode::steerable;
    else if (val == "va") cfg.mode = AntennaMode::vertical;
    else throw ConfigError("uav.antenna_mode: expected sa or va, got '" + val + "'");
    return true;
  }
  if (key == "oba.treatment") {
    if (val == "exact") cfg.oba = ObaTreatment::exact;
    else if (val == "uniform") cfg.oba = ObaTreatment::uniform_baseline;
    else throw ConfigError("oba.treatment: expected exact or uniform, got '" + val + "'");
    return true;
  }
  if (key == "literal_gain_exponent") {
    const bool b = to_bool(key, val);
    cfg.tbs_antenna.literal_exponent = b;
    cfg.uav_antenna.literal_exponent = b;
    return true;
  }

  for (Tier t : kTiers) {
    const std::string base = std::string("tier.") + tier_name(t) + ".";
    if (key == base + "alpha") { cfg.tier(t).alpha = num(); return true; }
    if (key == base + "kappa") { cfg.tier(t).kappa = num(); return true; }
    if (key == base + "fading_m") {
      cfg.tier(t).fading_m = int(num());
      return true;
    }
  }
  return false;
}

/// Builds a scenario from parsed keys, starting from the urban defaults.
/// Keys outside the schema raise ConfigError listing the offending path.
inline NetworkConfig config_from_text(const ConfigText& text,
                                      bool ignore_sweep_keys = true) {
  NetworkConfig cfg = NetworkConfig::urban_defaults();
  for (const auto& [key, val] : text.values) {
    if (ignore_sweep_keys && key.rfind("sweep.", 0) == 0) continue;
    if (!apply_config_key(cfg, key, val))
      throw ConfigError("unknown config key: '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

namespace detail_io {

/// Shortest decimal text for a boundary-converted value that parses back to
/// exactly the internal double (so serialize/parse is an involution).
template <class FromExternal>
std::string canonical_external(double internal, double external_guess,
                               FromExternal from_external) {
  auto render = [](double v, int prec) {
    std::ostringstream s;
    s.precision(prec);
    s << v;
    return s.str();
  };
  for (int prec = 1; prec <= 17; ++prec) {
    const std::string text = render(external_guess, prec);
    if (from_external(std::stod(text)) == internal) return text;
  }
  for (double d :
       {std::nextafter(external_guess, std::numeric_limits<double>::infinity()),
        std::nextafter(external_guess, -std::numeric_limits<double>::infinity())}) {
    const std::string text = render(d, 17);
    if (from_external(std::stod(text)) == internal) return text;
  }
  return render(external_guess, 17);
}

}  // namespace detail_io

/// Canonical serialization (fixed key order, round-trip exact doubles).
inline std::string serialize_config(const NetworkConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  auto put = [&](const std::string& k, double v) { out << k << " = " << v << "\n"; };
  auto put_density = [&](const std::string& k, double lambda) {
    out << k << " = "
        << detail_io::canonical_external(lambda, lambda * 1e6,
                                         [](double v) { return v * 1e-6; })
        << "\n";
  };
  auto put_gain_db = [&](const std::string& k, double gain) {
    out << k << " = "
        << detail_io::canonical_external(
               gain, 10.0 * std::log10(gain),
               [](double v) { return std::pow(10.0, v / 10.0); })
        << "\n";
  };
  auto put_deg = [&](const std::string& k, double rad) {
    out << k << " = "
        << detail_io::canonical_external(rad, rad * kDegPerRad,
                                         [](double v) { return v / kDegPerRad; })
        << "\n";
  };
  put("env.mu_a", cfg.env.mu_a);
  put("env.mu_b", cfg.env.mu_b);
  put_density("tbs.density_per_km2", cfg.lambda_b);
  put("tbs.altitude_m", cfg.h_b);
  put("tbs.power_w", cfg.p_b);
  put_gain_db("tbs.max_gain_db", cfg.tbs_antenna.max_gain);
  put_deg("tbs.beamwidth_deg", cfg.tbs_antenna.beamwidth_rad);
  put("tbs.sla_db", cfg.tbs_antenna.sidelobe_db);
  put_density("uav.density_per_km2", cfg.lambda_u);
  put("uav.altitude_m", cfg.h_u);
  put("uav.power_w", cfg.p_u);
  put_gain_db("uav.max_gain_db", cfg.uav_antenna.max_gain);
  put_deg("uav.beamwidth_deg", cfg.uav_antenna.beamwidth_rad);
  put("uav.sla_db", cfg.uav_antenna.sidelobe_db);
  out << "uav.antenna_mode = " << mode_name(cfg.mode) << "\n";
  out << "oba.treatment = "
      << (cfg.oba == ObaTreatment::exact ? "exact" : "uniform") << "\n";
  out << "literal_gain_exponent = "
      << (cfg.uav_antenna.literal_exponent ? "true" : "false") << "\n";
  put("noise_w", cfg.n0);
  for (Tier t : kTiers) {
    const std::string base = std::string("tier.") + tier_name(t) + ".";
    put(base + "alpha", cfg.tier(t).alpha);
    put(base + "kappa", cfg.tier(t).kappa);
    out << base << "fading_m = " << cfg.tier(t).fading_m << "\n";
  }
  return out.str();
}

/// FNV-1a hash of the canonical serialization; echoed in output metadata.
inline std::string config_hash(const NetworkConfig& cfg) {
  const std::string s = serialize_config(cfg);
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

/// Numeric parameter paths a sweep may vary, resolved against the scenario.
inline void set_config_parameter(NetworkConfig& cfg, const std::string& path,
                                 double value) {
  std::ostringstream v;
  v.precision(17);
  v << value;
  if (!apply_config_key(cfg, path, v.str()))
    throw ConfigError("sweep parameter path does not resolve: '" + path + "'");
}

}  // namespace uavmeta
