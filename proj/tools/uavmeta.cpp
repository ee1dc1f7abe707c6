// Batch front-end for the UAV-assisted network analysis library.
//
// Subcommands: assoc, coverage, moments, meta, delay, oba, simulate, sweep,
// validate. Scenario files use flat dotted keys (see README); CSV goes to
// stdout or --out, JSON with --format json.
//
// Exit codes: 0 success, 2 config error, 3 numeric failure, 4 divergence
// detected (mean local delay).

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uavmeta/uavmeta.hpp"

namespace {

using namespace uavmeta;

constexpr double kNoGamma = -1e30;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

std::vector<double> parse_grid(const std::string& text) {
  // "a:b:n" (n linear points), "a:b:nlog" (log spacing), or "x,y,z"
  if (text.find(':') != std::string::npos) {
    std::istringstream in(text);
    std::string a, b, n;
    std::getline(in, a, ':');
    std::getline(in, b, ':');
    std::getline(in, n, ':');
    bool logspace = false;
    const auto pos = n.find("log");
    if (pos != std::string::npos) {
      logspace = true;
      n = n.substr(0, pos);
    }
    const double lo = std::stod(a), hi = std::stod(b);
    const int count = std::stoi(n);
    return SweepSpec::grid(lo, hi, count,
                           logspace ? SweepSpec::Spacing::log
                                    : SweepSpec::Spacing::linear);
  }
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  if (out.empty()) throw ConfigError("empty value grid: '" + text + "'");
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

std::vector<AntennaMode> parse_modes(const std::string& text) {
  std::vector<AntennaMode> out;
  for (const auto& m : split_list(text)) {
    if (m == "sa") out.push_back(AntennaMode::steerable);
    else if (m == "va") out.push_back(AntennaMode::vertical);
    else if (m == "both") {
      out = {AntennaMode::steerable, AntennaMode::vertical};
      break;
    } else {
      throw ConfigError("unknown mode '" + m + "' (expected sa, va, both)");
    }
  }
  if (out.empty()) throw ConfigError("no antenna mode selected");
  return out;
}

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string format = "csv";
  std::string out_path;
  int threads = 0;

  NetworkConfig load() const {
    ConfigText text;
    if (!config_path.empty()) text = ConfigText::parse_file(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got '" + kv + "'");
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t");
        const auto b = s.find_last_not_of(" \t");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      text.values[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
    }
    return config_from_text(text);
  }

  std::optional<ConfigText> raw_text() const {
    if (config_path.empty()) return std::nullopt;
    return ConfigText::parse_file(config_path);
  }

  void emit(Table& table, const NetworkConfig& cfg) const {
    table.add_meta("config_hash", config_hash(cfg));
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
      file.open(out_path, std::ios::binary);
      if (!file) throw ConfigError("cannot open output file: " + out_path);
      os = &file;
    }
    if (format == "json")
      write_json(table, *os);
    else
      write_csv(table, *os);
  }
};

int cmd_assoc(const Common& common, const std::string& modes_text,
              const std::string& asymptotic) {
  const NetworkConfig base = common.load();
  Table t;
  t.columns = {"mode", "limit", "a_tbs", "a_los", "a_nlos"};
  for (AntennaMode mode : parse_modes(modes_text)) {
    NetworkConfig cfg = base;
    cfg.mode = mode;
    const AssociationResult a = association_probabilities(cfg);
    t.rows.push_back({std::string(mode_name(mode)), std::string("finite"),
                      a.a[0], a.a[1], a.a[2]});
    if (!asymptotic.empty()) {
      const DensityLimit lim = asymptotic == "lambda_b"
                                   ? DensityLimit::lambda_b_inf
                                   : DensityLimit::lambda_u_inf;
      const AssociationResult aa = asymptotic_association(cfg, lim);
      t.rows.push_back({std::string(mode_name(mode)),
                        std::string(asymptotic + "_inf"), aa.a[0], aa.a[1],
                        aa.a[2]});
    }
  }
  common.emit(t, base);
  return 0;
}

int cmd_coverage(const Common& common, const std::string& gamma_db_text,
                 const std::string& modes_text, const std::string& method) {
  const NetworkConfig base = common.load();
  const std::vector<double> gdbs = parse_grid(gamma_db_text);
  const MomentMethod mm = method == "alzer" ? MomentMethod::alzer_expansion
                                            : MomentMethod::exact;
  Table t;
  t.columns = {"mode", "gamma_db", "coverage"};
  for (AntennaMode mode : parse_modes(modes_text)) {
    NetworkConfig cfg = base;
    cfg.mode = mode;
    Analysis an(cfg);
    for (double gdb : gdbs)
      t.rows.push_back({std::string(mode_name(mode)), gdb,
                        csp_moment(an, db_to_linear(gdb), 1, mm).total});
  }
  common.emit(t, base);
  return 0;
}

int cmd_moments(const Common& common, double gamma_db,
                const std::string& b_list, const std::string& modes_text,
                const std::string& method) {
  const NetworkConfig base = common.load();
  const MomentMethod mm = method == "alzer" ? MomentMethod::alzer_expansion
                                            : MomentMethod::exact;
  Table t;
  t.columns = {"mode",  "gamma_db", "b",     "total", "m_tbs",
               "m_los", "m_nlos",   "a_tbs", "a_los", "a_nlos"};
  for (AntennaMode mode : parse_modes(modes_text)) {
    NetworkConfig cfg = base;
    cfg.mode = mode;
    Analysis an(cfg);
    for (double b : parse_grid(b_list)) {
      const MomentResult m = csp_moment(an, db_to_linear(gamma_db), int(b), mm);
      t.rows.push_back({std::string(mode_name(mode)), gamma_db, long(b),
                        m.total, m.per_tier[0], m.per_tier[1], m.per_tier[2],
                        m.association.a[0], m.association.a[1],
                        m.association.a[2]});
    }
  }
  common.emit(t, base);
  return 0;
}

int cmd_meta(const Common& common, double gamma_db, const std::string& x_text,
             const std::string& method, long networks, long fading,
             uint64_t seed, double region) {
  const NetworkConfig cfg = common.load();
  const double gamma = db_to_linear(gamma_db);
  std::vector<double> xs = parse_grid(x_text);
  Analysis an(cfg);
  MetaDistributionCurve curve;
  if (method == "beta") {
    const double m1 = csp_moment(an, gamma, 1).total;
    const double m2 = csp_moment(an, gamma, 2).total;
    curve = meta_distribution_beta(m1, m2, xs);
  } else if (method == "gilpelaez") {
    curve = meta_distribution_gilpelaez(an, gamma, xs);
  } else if (method == "empirical") {
    const EmpiricalMD md = empirical_md(an, gamma, xs, networks, fading, seed,
                                        region, common.threads);
    curve.method = MetaDistributionCurve::Method::empirical;
    curve.xs = md.xs;
    curve.values = md.values;
  } else {
    throw ConfigError("meta --method: expected beta, gilpelaez or empirical");
  }
  Table t;
  t.columns = {"x", "fbar"};
  t.add_meta("gamma_db", std::to_string(gamma_db));
  t.add_meta("method", method);
  if (method == "empirical") t.add_meta("seed", std::to_string(seed));
  for (size_t i = 0; i < curve.xs.size(); ++i)
    t.rows.push_back({curve.xs[i], curve.values[i]});
  common.emit(t, cfg);
  return 0;
}

int cmd_delay(const Common& common, double gamma_db) {
  const NetworkConfig cfg = common.load();
  Analysis an(cfg);
  const DelayResult d = mean_local_delay(an, db_to_linear(gamma_db));
  Table t;
  t.columns = {"gamma_db", "mean_local_delay", "divergent"};
  t.rows.push_back({gamma_db,
                    d.divergent ? std::numeric_limits<double>::infinity()
                                : d.attempts,
                    std::string(d.divergent ? "true" : "false")});
  if (d.divergent) t.add_meta("diagnostic", d.diagnostic);
  common.emit(t, cfg);
  return d.divergent ? 4 : 0;
}

int cmd_oba(const Common& common, double l, const std::string& theta_text,
            bool gain_profile, const std::string& r_text) {
  const NetworkConfig cfg = common.load();
  Analysis an(cfg);
  Table t;
  if (gain_profile) {
    t.columns = {"r_m", "mean_gain"};
    for (double r : parse_grid(r_text))
      t.rows.push_back({r, an.gain_profile()(r)});
  } else {
    t.columns = {"theta_rad", "pdf", "cdf"};
    for (double th : parse_grid(theta_text))
      t.rows.push_back({th, oba_pdf_given_l(an.geometry(), l, th),
                        oba_cdf_given_l(an.geometry(), l, th)});
    t.add_meta("l_m", std::to_string(l));
  }
  common.emit(t, cfg);
  return 0;
}

int cmd_simulate(const Common& common, const std::string& metric,
                 const std::string& gamma_db_text, const std::string& x_text,
                 long networks, long fading, uint64_t seed, double region) {
  const NetworkConfig cfg = common.load();
  Analysis an(cfg);
  Table t;
  t.add_meta("seed", std::to_string(seed));
  t.add_meta("networks", std::to_string(networks));
  int rc = 0;
  if (metric == "assoc") {
    const AssociationResult a =
        empirical_association(an, networks, seed, region, common.threads);
    t.columns = {"a_tbs", "a_los", "a_nlos"};
    t.rows.push_back({a.a[0], a.a[1], a.a[2]});
  } else if (metric == "coverage") {
    const std::vector<double> gdbs = parse_grid(gamma_db_text);
    std::vector<double> gammas;
    for (double g : gdbs) gammas.push_back(db_to_linear(g));
    const std::vector<double> cov = empirical_coverage(
        an, gammas, networks, fading, seed, region, common.threads);
    t.columns = {"gamma_db", "coverage"};
    for (size_t i = 0; i < gdbs.size(); ++i) t.rows.push_back({gdbs[i], cov[i]});
    t.add_meta("fading", std::to_string(fading));
  } else if (metric == "md") {
    const double gamma = db_to_linear(parse_grid(gamma_db_text)[0]);
    const EmpiricalMD md = empirical_md(an, gamma, parse_grid(x_text),
                                        networks, fading, seed, region,
                                        common.threads);
    t.columns = {"x", "fbar"};
    for (size_t i = 0; i < md.xs.size(); ++i)
      t.rows.push_back({md.xs[i], md.values[i]});
  } else if (metric == "delay") {
    const double gamma = db_to_linear(parse_grid(gamma_db_text)[0]);
    const EmpiricalDelay d = empirical_delay(an, gamma, networks, fading, seed,
                                             1e-3, region, common.threads);
    t.columns = {"mean_local_delay", "truncated_fraction"};
    t.rows.push_back({d.attempts, d.truncated_fraction});
    if (d.truncated_fraction > 0.05) rc = 4;
  } else {
    throw ConfigError("simulate --metric: expected assoc, coverage, md or delay");
  }
  common.emit(t, cfg);
  return rc;
}

int cmd_sweep(const Common& common, std::string param, std::string values,
              std::string linear, std::string logspec, std::string metrics,
              std::string modes_text, double gamma_db) {
  const NetworkConfig cfg = common.load();
  SweepSpec spec;
  // preset files may carry sweep.* keys; explicit flags win
  if (auto text = common.raw_text()) {
    auto get = [&](const char* k) -> std::string {
      auto it = text->values.find(k);
      return it == text->values.end() ? std::string() : it->second;
    };
    if (param.empty()) param = get("sweep.param");
    if (values.empty()) values = get("sweep.values");
    if (linear.empty()) linear = get("sweep.linear");
    if (logspec.empty()) logspec = get("sweep.log");
    if (metrics.empty()) metrics = get("sweep.metrics");
    if (modes_text.empty()) modes_text = get("sweep.modes");
    const std::string g = get("sweep.gamma_db");
    if (!g.empty() && gamma_db == kNoGamma) gamma_db = std::stod(g);
  }
  if (modes_text.empty()) modes_text = "sa";
  if (gamma_db == kNoGamma) gamma_db = 0.0;
  if (param.empty()) throw ConfigError("sweep: --param is required");
  spec.parameter = param;
  if (!values.empty()) {
    spec.values = parse_grid(values);
  } else if (!linear.empty() || !logspec.empty()) {
    std::istringstream in(linear.empty() ? logspec : linear);
    double a, b;
    int n;
    if (!(in >> a >> b >> n))
      throw ConfigError("sweep grid: expected 'start stop count'");
    spec.spacing = linear.empty() ? SweepSpec::Spacing::log
                                  : SweepSpec::Spacing::linear;
    spec.values = SweepSpec::grid(a, b, n, spec.spacing);
  } else {
    throw ConfigError("sweep: provide --values, --linear or --log");
  }
  spec.metrics = split_list(metrics.empty() ? "coverage" : metrics);
  Table t = run_sweep(cfg, spec, parse_modes(modes_text),
                      db_to_linear(gamma_db), common.threads);
  t.add_meta("gamma_db", std::to_string(gamma_db));
  common.emit(t, cfg);
  return 0;
}

int cmd_validate(const Common& common, long networks, long fading,
                 uint64_t seed, double region) {
  const NetworkConfig base = common.load();
  Table t;
  t.columns = {"check", "mode", "analytic", "empirical", "tolerance", "pass"};
  t.add_meta("seed", std::to_string(seed));
  t.add_meta("networks", std::to_string(networks));
  t.add_meta("fading", std::to_string(fading));
  bool all_pass = true;
  auto push = [&](const std::string& check, AntennaMode mode, double ana,
                  double emp, double tol) {
    const bool ok = std::fabs(ana - emp) <= tol;
    all_pass = all_pass && ok;
    t.rows.push_back({check, std::string(mode_name(mode)), ana, emp, tol,
                      std::string(ok ? "pass" : "FAIL")});
  };
  for (AntennaMode mode : {AntennaMode::steerable, AntennaMode::vertical}) {
    NetworkConfig cfg = base;
    cfg.mode = mode;
    Analysis an(cfg);
    const AssociationResult ana = an.association();
    const AssociationResult emp =
        empirical_association(an, networks, seed, 2000.0, common.threads);
    for (Tier k : kTiers)
      push(std::string("assoc_") + tier_name(k), mode, ana[k], emp[k], 0.01);

    const std::vector<double> cov = empirical_coverage(
        an, {1.0}, std::max<long>(networks / 10, 100), fading, seed + 1,
        region, common.threads);
    const double m1 = csp_moment(an, 1.0, 1).total;
    const double m2 = csp_moment(an, 1.0, 2).total;
    push("coverage_0db", mode, m1, cov[0], 0.02);

    std::vector<double> xs;
    for (int i = 1; i < 40; ++i) xs.push_back(i / 40.0);
    const EmpiricalMD md =
        empirical_md(an, 1.0, xs, std::max<long>(networks / 10, 100), fading,
                     seed + 2, 2000.0, common.threads);
    double emp_m2 = 0.0;
    for (double v : md.csp_samples) emp_m2 += v * v;
    emp_m2 /= double(md.csp_samples.size());
    push("m2_0db", mode, m2, emp_m2, 0.02);
    const MetaDistributionCurve beta = meta_distribution_beta(m1, m2, xs);
    double sup = 0.0;
    for (size_t i = 0; i < xs.size(); ++i)
      sup = std::max(sup, std::fabs(beta.values[i] - md.values[i]));
    push("md_beta_sup_0db", mode, 0.0, sup, 0.05);
  }
  t.add_meta("overall", all_pass ? "pass" : "FAIL");
  common.emit(t, base);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fine-grained performance of UAV-assisted cellular networks: "
               "association, SINR meta distribution, coverage moments, mean "
               "local delay, and a Monte Carlo cross-validator."};
  app.require_subcommand(1);

  Common common;
  app.add_option("--config", common.config_path,
                 "Scenario file (flat dotted keys; defaults: urban deployment)");
  app.add_option("--set", common.overrides,
                 "Override a config key, e.g. --set uav.altitude_m=200");
  app.add_option("--format", common.format, "csv (default) or json")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", common.out_path, "Write output to a file");
  app.add_option("--threads", common.threads,
                 "Worker cap (default: UAVMETA_THREADS or hardware)");

  auto* assoc = app.add_subcommand("assoc", "Tier association probabilities");
  std::string assoc_modes = "both", assoc_asym;
  assoc->add_option("--modes", assoc_modes, "sa, va or both");
  assoc->add_option("--asymptotic", assoc_asym,
                    "Also report the infinite-density limit: lambda_b or lambda_u")
      ->check(CLI::IsMember({"lambda_b", "lambda_u"}));

  auto* coverage = app.add_subcommand("coverage", "Coverage probability M_1(gamma)");
  std::string cov_gdb = "-10,-5,0,5,10", cov_modes = "sa", cov_method = "exact";
  coverage->add_option("--gamma-db", cov_gdb, "Threshold grid in dB (list or a:b:n)");
  coverage->add_option("--modes", cov_modes, "sa, va or both");
  coverage->add_option("--method", cov_method, "exact or alzer")
      ->check(CLI::IsMember({"exact", "alzer"}));

  auto* moments = app.add_subcommand("moments", "CSP moments M_b");
  double mom_gdb = 0.0;
  std::string mom_b = "1,2", mom_modes = "sa", mom_method = "exact";
  moments->add_option("--gamma-db", mom_gdb, "Threshold in dB");
  moments->add_option("--b", mom_b, "Moment orders (integer list)");
  moments->add_option("--modes", mom_modes, "sa, va or both");
  moments->add_option("--method", mom_method, "exact or alzer")
      ->check(CLI::IsMember({"exact", "alzer"}));

  auto* meta = app.add_subcommand("meta", "SINR meta distribution");
  double meta_gdb = 0.0, meta_region = 2000.0;
  std::string meta_x = "0.0099:0.9999:101", meta_method = "beta";
  long meta_networks = 2000, meta_fading = 500;
  uint64_t meta_seed = 1;
  meta->add_option("--gamma-db", meta_gdb, "Threshold in dB");
  meta->add_option("--x", meta_x, "Reliability grid (list or a:b:n)");
  meta->add_option("--method", meta_method, "beta, gilpelaez or empirical")
      ->check(CLI::IsMember({"beta", "gilpelaez", "empirical"}));
  meta->add_option("--networks", meta_networks, "Realizations (empirical)");
  meta->add_option("--fading", meta_fading, "Fading draws per realization");
  meta->add_option("--seed", meta_seed, "Master seed (empirical)");
  meta->add_option("--region", meta_region, "Simulation disk radius in m");

  auto* delay = app.add_subcommand("delay", "Mean local delay (Rayleigh-only)");
  double delay_gdb = 0.0;
  delay->add_option("--gamma-db", delay_gdb, "Threshold in dB");

  auto* oba = app.add_subcommand("oba", "Interferer off-boresight-angle analysis");
  double oba_l = 50.0;
  std::string oba_theta = "0.001:3.1406:181", oba_r = "100:100000:64log";
  bool oba_gain = false;
  oba->add_option("--l", oba_l, "Horizontal distance to the interfering UAV (m)");
  oba->add_option("--theta", oba_theta, "Angle grid in rad");
  oba->add_flag("--gain", oba_gain, "Emit the mean interfering gain profile instead");
  oba->add_option("--r", oba_r, "3D distance grid for --gain");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates");
  std::string sim_metric = "coverage", sim_gdb = "0", sim_x = "0.0099:0.9999:101";
  long sim_networks = 2000, sim_fading = 500;
  uint64_t sim_seed = 1;
  double sim_region = 2000.0;
  simulate->add_option("--metric", sim_metric, "assoc, coverage, md or delay");
  simulate->add_option("--gamma-db", sim_gdb, "Threshold grid in dB");
  simulate->add_option("--x", sim_x, "Reliability grid (md)");
  simulate->add_option("--networks", sim_networks, "Realizations");
  simulate->add_option("--fading", sim_fading, "Fading draws per realization");
  simulate->add_option("--seed", sim_seed, "Master seed");
  simulate->add_option("--region", sim_region, "Simulation disk radius in m");

  auto* sweep = app.add_subcommand("sweep", "Parameter sweeps");
  std::string sw_param, sw_values, sw_linear, sw_log, sw_metrics, sw_modes;
  double sw_gdb = kNoGamma;
  sweep->add_option("--param", sw_param, "Dotted config key to vary");
  sweep->add_option("--values", sw_values, "Explicit value list");
  sweep->add_option("--linear", sw_linear, "'start stop count' linear grid");
  sweep->add_option("--log", sw_log, "'start stop count' log grid");
  sweep->add_option("--metric", sw_metrics,
                    "coverage, m2, variance, assoc, delay, md:<x> (comma list)");
  sweep->add_option("--modes", sw_modes, "sa, va or both");
  sweep->add_option("--gamma-db", sw_gdb, "Threshold in dB (default 0)");

  auto* validate = app.add_subcommand("validate", "Analytic vs Monte Carlo report");
  long val_networks = 10000, val_fading = 1000;
  uint64_t val_seed = 7;
  double val_region = 4000.0;
  validate->add_option("--networks", val_networks, "Association realizations");
  validate->add_option("--fading", val_fading, "Fading draws per realization");
  validate->add_option("--seed", val_seed, "Master seed");
  validate->add_option("--region", val_region, "Coverage simulation radius in m");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*assoc) return cmd_assoc(common, assoc_modes, assoc_asym);
    if (*coverage) return cmd_coverage(common, cov_gdb, cov_modes, cov_method);
    if (*moments) return cmd_moments(common, mom_gdb, mom_b, mom_modes, mom_method);
    if (*meta)
      return cmd_meta(common, meta_gdb, meta_x, meta_method, meta_networks,
                      meta_fading, meta_seed, meta_region);
    if (*delay) return cmd_delay(common, delay_gdb);
    if (*oba) return cmd_oba(common, oba_l, oba_theta, oba_gain, oba_r);
    if (*simulate)
      return cmd_simulate(common, sim_metric, sim_gdb, sim_x, sim_networks,
                          sim_fading, sim_seed, sim_region);
    if (*sweep)
      return cmd_sweep(common, sw_param, sw_values, sw_linear, sw_log,
                       sw_metrics, sw_modes, sw_gdb);
    if (*validate)
      return cmd_validate(common, val_networks, val_fading, val_seed, val_region);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
