#pragma once

// Parameter sweeps: vary one dotted config key over a value grid and tabulate
// requested metrics per point (and per antenna mode). Points are dispatched
// to a worker pool; output rows stay ordered by sweep index.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "uavmeta/configio.hpp"
#include "uavmeta/moments.hpp"
#include "uavmeta/output.hpp"
#include "uavmeta/sim.hpp"

namespace uavmeta {

struct SweepSpec {
  std::string parameter;       // dotted config key, e.g. uav.altitude_m
  std::vector<double> values;  // explicit grid
  enum class Spacing { linear, log } spacing = Spacing::linear;
  std::vector<std::string> metrics;  // coverage | m2 | variance | assoc | delay | md:<x>

  static std::vector<double> grid(double start, double stop, int count,
                                  Spacing spacing) {
    if (count < 1) throw ConfigError("sweep grid needs count >= 1");
    std::vector<double> v(count);
    if (count == 1) {
      v[0] = start;
      return v;
    }
    for (int i = 0; i < count; ++i) {
      const double f = double(i) / (count - 1);
      v[i] = spacing == Spacing::log
                 ? start * std::pow(stop / start, f)
                 : start + (stop - start) * f;
    }
    return v;
  }

  void validate(const NetworkConfig& base) const {
    if (values.empty()) throw ConfigError("sweep: empty value list");
    if (metrics.empty()) throw ConfigError("sweep: no metrics requested");
    NetworkConfig probe = base;
    set_config_parameter(probe, parameter, values.front());
  }
};

namespace detail_sweep {

inline bool metric_is_md(const std::string& m, double& x) {
  if (m.rfind("md:", 0) != 0) return false;
  x = std::stod(m.substr(3));
  return true;
}

}  // namespace detail_sweep

/// Runs the sweep at one SINR threshold; one row per (value, mode).
inline Table run_sweep(const NetworkConfig& base, const SweepSpec& spec,
                       const std::vector<AntennaMode>& modes, double gamma,
                       int threads = 0) {
  spec.validate(base);
  if (threads <= 0) threads = default_threads();

  Table table;
  table.columns = {"index", spec.parameter, "mode"};
  for (const auto& m : spec.metrics) {
    if (m == "assoc") {
      table.columns.push_back("a_tbs");
      table.columns.push_back("a_los");
      table.columns.push_back("a_nlos");
    } else {
      table.columns.push_back(m);
    }
  }

  struct Job {
    long index;
    double value;
    AntennaMode mode;
  };
  std::vector<Job> jobs;
  long idx = 0;
  for (double v : spec.values)
    for (AntennaMode mode : modes) jobs.push_back({idx++, v, mode});

  std::vector<std::vector<Cell>> rows(jobs.size());
  parallel_for(long(jobs.size()), threads, [&](long j) {
    const Job& job = jobs[j];
    NetworkConfig cfg = base;
    cfg.mode = job.mode;
    set_config_parameter(cfg, spec.parameter, job.value);
    Analysis an(cfg);
    std::vector<Cell> row{Cell(job.index), Cell(job.value),
                          Cell(std::string(mode_name(job.mode)))};
    double m1 = -1.0, m2 = -1.0;
    auto need_moments = [&](bool second) {
      if (m1 < 0.0) m1 = csp_moment(an, gamma, 1).total;
      if (second && m2 < 0.0) m2 = csp_moment(an, gamma, 2).total;
    };
    for (const auto& m : spec.metrics) {
      double md_x;
      if (m == "coverage") {
        need_moments(false);
        row.emplace_back(m1);
      } else if (m == "m2") {
        need_moments(true);
        row.emplace_back(m2);
      } else if (m == "variance") {
        need_moments(true);
        row.emplace_back(std::max(m2 - m1 * m1, 0.0));
      } else if (m == "assoc") {
        const AssociationResult& a = an.association();
        row.emplace_back(a[Tier::tbs]);
        row.emplace_back(a[Tier::los_uav]);
        row.emplace_back(a[Tier::nlos_uav]);
      } else if (m == "delay") {
        const DelayResult d = mean_local_delay(an, gamma);
        row.emplace_back(d.divergent
                             ? std::numeric_limits<double>::infinity()
                             : d.attempts);
      } else if (detail_sweep::metric_is_md(m, md_x)) {
        need_moments(true);
        const auto curve = meta_distribution_beta(m1, m2, {md_x});
        row.emplace_back(curve.values[0]);
      } else {
        throw ConfigError("unknown sweep metric: '" + m + "'");
      }
    }
    rows[j] = std::move(row);
  });
  table.rows = std::move(rows);
  return table;
}

}  // namespace uavmeta
