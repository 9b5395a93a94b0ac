#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "maxfield/constructions.hpp"
#include "maxfield/dependence.hpp"
#include "maxfield/gumbel.hpp"
#include "maxfield/inference.hpp"
#include "maxfield/io.hpp"
#include "maxfield/parallel.hpp"

namespace maxfield::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out = ".";
};

struct ModelOptions {
  std::string construction = "theorem2";
  double variance = 1.0;
  std::string family = "gauss";
  double c = 0.0;
  double d = 0.0;
  std::string sites_file;
  std::vector<double> line{0.0, 4.5, 10.0};
  double epsilon = 1e-6;
  std::optional<double> bound;
  std::uint64_t max_events = 1'000'000;
  double delta_m = 0.01;
  double buffer_sd = 13.0;
  std::optional<double> buffer;
  std::optional<double> ceiling;
  double floor_margin = 4.0;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker threads (0: MAXFIELD_THREADS or all cores)")->capture_default_str();
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
}

void add_model(CLI::App* cmd, ModelOptions& o) {
  cmd->add_option("--construction", o.construction, "theorem1, theorem2 or theorem3")->capture_default_str();
  cmd->add_option("--variance", o.variance, "Variance of the Gaussian process")->capture_default_str();
  cmd->add_option("--family", o.family, "Shape family: gauss, laplace or uniform")->capture_default_str();
  cmd->add_option("-c,--c", o.c, "Magnitude link centre")->capture_default_str();
  cmd->add_option("-d,--d", o.d, "Magnitude link slope")->capture_default_str();
  cmd->add_option("--sites", o.sites_file, "Site CSV (one coordinate column per dimension)");
  cmd->add_option("--line", o.line, "Evenly spaced sites on a line: start,stop,count")
      ->expected(3)
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--epsilon", o.epsilon, "Per-event exceedance probability of the contribution bound")
      ->capture_default_str();
  cmd->add_option("--bound", o.bound, "Explicit contribution bound B");
  cmd->add_option("--max-events", o.max_events, "Event cap per realization")->capture_default_str();
  cmd->add_option("--delta-m", o.delta_m, "Magnitude quantum of the factorization cache (0 disables)")
      ->capture_default_str();
  cmd->add_option("--buffer-sd", o.buffer_sd, "Window buffer in units of the largest scale")->capture_default_str();
  cmd->add_option("--buffer", o.buffer, "Absolute window buffer");
  cmd->add_option("--ceiling", o.ceiling, "Magnitude ceiling (shape construction)");
  cmd->add_option("--floor-margin", o.floor_margin, "Magnitude floor margin (shape construction)")
      ->capture_default_str();
}

ModelConfig to_model(const ModelOptions& o) {
  ModelConfig m;
  try {
    m.construction = parse_construction(o.construction);
    m.family = parse_family(o.family);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  m.variance = o.variance;
  m.link = {o.c, o.d};
  m.truncation.epsilon = o.epsilon;
  m.truncation.bound = o.bound;
  m.truncation.max_events = o.max_events;
  m.truncation.delta_m = o.delta_m;
  m.truncation.buffer_sd = o.buffer_sd;
  m.truncation.buffer = o.buffer;
  m.truncation.magnitude_ceiling = o.ceiling;
  m.truncation.floor_margin = o.floor_margin;
  return m;
}

SiteSet to_sites(const ModelOptions& o) {
  if (!o.sites_file.empty()) {
    if (!fs::exists(o.sites_file)) throw ConfigError("site file not found: " + o.sites_file);
    return load_sites_csv(o.sites_file);
  }
  const double count = o.line.at(2);
  if (!(count >= 1.0) || count != std::floor(count)) throw ConfigError("--line count must be a positive integer");
  const auto p = static_cast<std::size_t>(count);
  std::vector<double> xs(p);
  for (std::size_t i = 0; i < p; ++i) {
    xs[i] = p == 1 ? o.line[0] : o.line[0] + (o.line[1] - o.line[0]) * static_cast<double>(i) / static_cast<double>(p - 1);
  }
  return SiteSet::on_line(xs);
}

std::vector<int> checked_ks(std::vector<int> ks) {
  if (ks.empty()) throw ConfigError("at least one block size is required");
  for (int k : ks)
    if (k < 1) throw ConfigError("block sizes must be >= 1");
  std::sort(ks.begin(), ks.end());
  if (std::adjacent_find(ks.begin(), ks.end()) != ks.end()) throw ConfigError("block sizes must be distinct");
  return ks;
}

json options_json(const ModelOptions& o) {
  json j{{"construction", o.construction}, {"variance", o.variance},     {"family", o.family},
         {"c", o.c},                       {"d", o.d},                   {"epsilon", o.epsilon},
         {"max_events", o.max_events},     {"delta_m", o.delta_m},       {"buffer_sd", o.buffer_sd},
         {"floor_margin", o.floor_margin}};
  j["bound"] = o.bound ? json(*o.bound) : json(nullptr);
  j["buffer"] = o.buffer ? json(*o.buffer) : json(nullptr);
  j["ceiling"] = o.ceiling ? json(*o.ceiling) : json(nullptr);
  if (o.sites_file.empty()) {
    j["line"] = o.line;
  } else {
    j["sites"] = o.sites_file;
  }
  return j;
}

fs::path output_dir(const CommonOptions& c) {
  fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + c.out + ": " + ec.message());
  return dir;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string fixed(double x, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << x;
  return s.str();
}

// ---- simulate --------------------------------------------------------------

struct SimulateOptions {
  CommonOptions common;
  ModelOptions model;
  std::vector<int> ks{1};
  std::size_t n = 1000;
};

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  const auto ks = checked_ks(o.ks);
  if (o.n < 1) throw ConfigError("--n must be >= 1");
  const SiteSet sites = to_sites(o.model);
  const auto sim = make_simulator(sites, to_model(o.model));
  const auto dir = output_dir(o.common);
  const auto samples = simulate_coupled_samples(*sim, ks, o.n, o.common.seed, o.common.threads);

  json meta{{"command", "simulate"}, {"options", options_json(o.model)}, {"n", o.n}, {"ks", ks},
            {"seed", o.common.seed}, {"coupling", "block sizes share event streams"}};
  meta["samples"] = json::array();
  for (const auto& s : samples) {
    const std::string name = "sample_k" + std::to_string(s.k) + ".csv";
    write_text_file(dir / name, sample_to_csv(s));
    json entry = sample_metadata(s, *sim);
    entry["file"] = name;
    meta["samples"].push_back(entry);
    out << "wrote " << (dir / name).string() << " (" << s.rows << " x " << s.sites << ")\n";
  }
  write_text_file(dir / "sample.json", dump(meta));
  return kSuccess;
}

// ---- tau-curve -------------------------------------------------------------

struct TauCurveOptions {
  CommonOptions common;
  ModelOptions model;
  std::vector<int> ks{1, 8, 64};
  std::size_t n = 10'000;
  std::string pairs = "reference";
};

int cmd_tau_curve(const TauCurveOptions& o, std::ostream& out) {
  const auto ks = checked_ks(o.ks);
  if (o.n < 2) throw ConfigError("--n must be >= 2");
  const SiteSet sites = to_sites(o.model);
  if (sites.size() < 2) throw ConfigError("a tau curve needs at least 2 sites");
  std::vector<SitePair> pairs;
  if (o.pairs == "reference") {
    pairs = reference_pairs(sites.size());
  } else if (o.pairs == "all") {
    pairs = all_pairs(sites.size());
  } else {
    throw ConfigError("--pairs must be 'reference' or 'all'");
  }
  const auto sim = make_simulator(sites, to_model(o.model));
  const auto dir = output_dir(o.common);
  const auto samples = simulate_coupled_samples(*sim, ks, o.n, o.common.seed, o.common.threads);
  TauCurve curve;
  json meta{{"command", "tau-curve"}, {"options", options_json(o.model)}, {"n", o.n}, {"ks", ks},
            {"seed", o.common.seed},    {"pairs", o.pairs},
            {"coupling", "block sizes share event streams"}};
  meta["samples"] = json::array();
  for (const auto& s : samples) {
    const auto part = tau_curve(s, sites, pairs, o.common.threads);
    curve.insert(curve.end(), part.begin(), part.end());
    meta["samples"].push_back(sample_metadata(s, *sim));
  }
  write_text_file(dir / "tau_curve.csv", tau_curve_to_csv(curve));
  write_text_file(dir / "tau_curve.json", dump(meta));
  out << "wrote " << (dir / "tau_curve.csv").string() << " (" << curve.size() << " rows)\n";
  return kSuccess;
}

// ---- margins-test ----------------------------------------------------------

struct MarginsOptions {
  CommonOptions common;
  ModelOptions model;
  int k = 1;
  std::size_t n = 10'000;
  std::string sample_file;
  std::string test_case;  // empty: construction default
  std::optional<double> null_location;
  double null_scale = 1.0;
};

struct LoadedSample {
  std::vector<std::vector<double>> columns;
  int k = 1;
};

LoadedSample load_sample_csv(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("sample file not found: " + path);
  const CsvTable table = read_csv(path);
  if (table.header.size() < 3 || table.header[0] != "rep" || table.header[1] != "k") {
    throw CsvError(path + ": line 1: header must be rep,k,site_0,...", 1);
  }
  LoadedSample s;
  s.columns.resize(table.header.size() - 2);
  bool first = true;
  for (const auto& row : table.rows) {
    if (row.fields.size() != table.header.size()) {
      throw CsvError(path + ": line " + std::to_string(row.line) + ": expected " +
                         std::to_string(table.header.size()) + " fields",
                     row.line);
    }
    const auto k = static_cast<int>(parse_integer(row.fields[1], row.line, 1));
    if (first) {
      s.k = k;
      first = false;
    } else if (k != s.k) {
      throw CsvError(path + ": line " + std::to_string(row.line) + ": mixed block sizes", row.line);
    }
    for (std::size_t c = 0; c < s.columns.size(); ++c) s.columns[c].push_back(parse_double(row.fields[c + 2], row.line, c + 2));
  }
  return s;
}

int cmd_margins_test(const MarginsOptions& o, std::ostream& out) {
  const ModelConfig model = to_model(o.model);
  LoadedSample data;
  json meta{{"command", "margins-test"}, {"options", options_json(o.model)}, {"seed", o.common.seed}};
  if (!o.sample_file.empty()) {
    data = load_sample_csv(o.sample_file);
    meta["sample"] = o.sample_file;
  } else {
    if (o.k < 1) throw ConfigError("--k must be >= 1");
    if (o.n < 100) throw ConfigError("margin tests need n >= 100, got " + std::to_string(o.n));
    const SiteSet sites = to_sites(o.model);
    const auto sim = make_simulator(sites, model);
    const auto sample = simulate_sample(*sim, o.k, o.n, o.common.seed, 0, o.common.threads);
    data.k = o.k;
    for (std::size_t s = 0; s < sample.sites; ++s) data.columns.push_back(sample.column(s));
    meta["simulation"] = sample_metadata(sample, *sim);
  }
  const std::size_t n = data.columns.empty() ? 0 : data.columns.front().size();
  if (n < 100) throw ConfigError("margin tests need n >= 100, got " + std::to_string(n));
  if (!(o.null_scale > 0.0)) throw ConfigError("--null-scale must be > 0");

  const bool shape = model.construction == Construction::Theorem3;
  const std::string which = o.test_case.empty() ? (shape ? "known-scale" : "specified") : o.test_case;
  AdCase ad_case;
  if (which == "specified") {
    ad_case = AdCase::FullySpecified;
  } else if (which == "known-scale") {
    ad_case = AdCase::KnownScale;
  } else {
    throw ConfigError("--case must be 'specified' or 'known-scale'");
  }
  const double base_location = shape ? shape_margin_location(model.link) : 0.0;
  const double null_location = o.null_location.value_or(base_location + o.null_scale * std::log(data.k));

  meta["k"] = data.k;
  meta["n"] = n;
  meta["case"] = to_string(ad_case);
  meta["null"] = {{"scale", o.null_scale}};
  if (ad_case == AdCase::FullySpecified) meta["null"]["location"] = null_location;
  meta["sites"] = json::array();

  out << "site  a_hat      se       b_hat    se       A2       reject5  reject10\n";
  std::size_t rejected5 = 0;
  for (std::size_t s = 0; s < data.columns.size(); ++s) {
    const auto& x = data.columns[s];
    const GumbelFit full = fit_gumbel_ml(x);
    GumbelParams null{null_location, o.null_scale};
    double a_hat = full.params.location;
    double a_se = full.se_location;
    if (ad_case == AdCase::KnownScale) {
      const LocationFit loc = fit_location_known_scale(x, o.null_scale);
      null.location = a_hat = loc.location;
      a_se = loc.standard_error;
    }
    const double a2 = anderson_darling(x, [&](double v) { return gumbel_cdf(v, null); });
    const AdResult r5 = ad_decide(a2, ad_case, 0.05);
    const AdResult r10 = ad_decide(a2, ad_case, 0.10);
    rejected5 += r5.reject ? 1 : 0;
    meta["sites"].push_back({{"site", s},
                             {"location", a_hat},
                             {"location_se", a_se},
                             {"ml_fit",
                              {{"location", full.params.location},
                               {"location_se", full.se_location},
                               {"scale", full.params.scale},
                               {"scale_se", full.se_scale}}},
                             {"ad_statistic", a2},
                             {"reject_5", r5.reject},
                             {"reject_10", r10.reject}});
    out << std::left << std::setw(6) << s << std::setw(11) << fixed(a_hat, 4) << std::setw(9) << fixed(a_se, 4)
        << std::setw(9) << fixed(full.params.scale, 4) << std::setw(9) << fixed(full.se_scale, 4) << std::setw(9)
        << fixed(a2, 4) << std::setw(9) << (r5.reject ? "yes" : "no") << (r10.reject ? "yes" : "no") << "\n";
  }
  meta["rejected_5"] = rejected5;
  out << "critical values (" << to_string(ad_case) << "): 5% " << ad_critical_value(ad_case, 0.05) << ", 10% "
      << ad_critical_value(ad_case, 0.10) << "\n";
  const auto dir = output_dir(o.common);
  write_text_file(dir / "margins.json", dump(meta));
  return kSuccess;
}

// ---- table1 ----------------------------------------------------------------

struct Table1Options {
  CommonOptions common;
  ModelOptions model;
  std::size_t n = 50'000;
};

int cmd_table1(const Table1Options& o, std::ostream& out) {
  if (o.n < 100) throw ConfigError("--n must be >= 100");
  const SiteSet sites = SiteSet::on_line(std::vector<double>{0.0});
  const std::vector<std::pair<double, double>> columns{{2.0, -0.3}, {3.0, -0.2}};
  const std::vector<ShapeFamily> families{ShapeFamily::Gauss, ShapeFamily::Laplace, ShapeFamily::Uniform};
  ModelConfig base = to_model(o.model);
  base.construction = Construction::Theorem3;

  std::string csv = "family,c,d,n,location,se,analytic_location,ad_statistic,reject_5\n";
  json meta{{"command", "table1"}, {"options", options_json(o.model)}, {"n", o.n}, {"seed", o.common.seed},
            {"scale", 1.0}, {"cells", json::array()}};
  out << "family   c    d      a_hat     se       analytic  A2\n";
  std::uint64_t cell = 0;
  for (const auto family : families) {
    for (const auto& [c, d] : columns) {
      ModelConfig model = base;
      model.family = family;
      model.link = {c, d};
      const auto sim = make_simulator(sites, model);
      const auto sample = simulate_sample(*sim, 1, o.n, mix_seed(o.common.seed, cell++), 0, o.common.threads);
      const auto x = sample.column(0);
      const LocationFit fit = fit_location_known_scale(x, 1.0);
      const double a2 = anderson_darling(x, [&](double v) { return gumbel_cdf(v, {fit.location, 1.0}); });
      const bool reject = ad_decide(a2, AdCase::KnownScale, 0.05).reject;
      const double analytic = shape_margin_location(model.link);
      csv += std::string(to_string(family)) + ',' + format_double(c) + ',' + format_double(d) + ',' +
             std::to_string(o.n) + ',' + format_double(fit.location) + ',' + format_double(fit.standard_error) + ',' +
             format_double(analytic) + ',' + format_double(a2) + ',' + (reject ? "1" : "0") + '\n';
      meta["cells"].push_back({{"family", to_string(family)},
                               {"c", c},
                               {"d", d},
                               {"location", fit.location},
                               {"location_se", fit.standard_error},
                               {"analytic_location", analytic},
                               {"ad_statistic", a2},
                               {"reject_5", reject},
                               {"simulation", sample_metadata(sample, *sim)}});
      out << std::left << std::setw(9) << to_string(family) << std::setw(5) << fixed(c, 0) << std::setw(7)
          << fixed(d, 1) << std::setw(10) << fixed(fit.location, 4) << std::setw(9) << fixed(fit.standard_error, 4)
          << std::setw(10) << fixed(analytic, 4) << fixed(a2, 4) << "\n";
    }
  }
  const auto dir = output_dir(o.common);
  write_text_file(dir / "table1.csv", csv);
  write_text_file(dir / "table1.json", dump(meta));
  return kSuccess;
}

// ---- estimate --------------------------------------------------------------

struct EstimateOptions {
  CommonOptions common;
  ModelOptions model;
  std::string obs_file;
  std::vector<int> ks{1, 2, 4};
  std::size_t n_sim = 2000;
  bool isotropic = false;
  std::size_t grid_points = 8;
  std::vector<std::string> free{"c", "d"};
  std::vector<double> variance_bounds{0.05, 9.0};
  std::vector<double> c_bounds{-2.0, 6.0};
  std::vector<double> d_bounds{-1.5, 1.5};
  std::size_t starts = 5;
  double tolerance = 1e-3;
  std::size_t max_evaluations = 80;
  std::size_t min_blocks = 10;
  bool curvature = true;
};

int cmd_estimate(const EstimateOptions& o, std::ostream& out) {
  if (o.obs_file.empty()) throw ConfigError("--obs is required");
  if (!fs::exists(o.obs_file)) throw ConfigError("observation file not found: " + o.obs_file);
  if (o.n_sim < 100) throw ConfigError("--n-sim must be >= 100");
  const auto ks = checked_ks(o.ks);
  const SiteSet sites = to_sites(o.model);
  const ObservedBlocks blocks = read_observed_csv(o.obs_file);
  const ObservedTauSet obs = observed_tau_set(blocks, sites, ks, o.min_blocks);

  ThetaBounds bounds;
  bounds.fixed = {o.model.variance, o.model.c, o.model.d};
  bounds.variance = {false, o.variance_bounds.at(0), o.variance_bounds.at(1)};
  bounds.c = {false, o.c_bounds.at(0), o.c_bounds.at(1)};
  bounds.d = {false, o.d_bounds.at(0), o.d_bounds.at(1)};
  for (const auto& name : o.free) {
    if (name == "variance") {
      bounds.variance.free = true;
    } else if (name == "c") {
      bounds.c.free = true;
    } else if (name == "d") {
      bounds.d.free = true;
    } else {
      throw ConfigError("unknown free parameter '" + name + "' (variance, c, d)");
    }
  }
  try {
    bounds.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  SimulationSettings settings;
  settings.n_sim = o.n_sim;
  settings.seed = o.common.seed;
  settings.isotropic = o.isotropic;
  settings.grid_points = o.grid_points;
  settings.threads = o.common.threads;

  OptimizerConfig opt;
  opt.starts = o.starts;
  opt.simplex.tolerance = o.tolerance;
  opt.simplex.max_evaluations = o.max_evaluations;
  opt.curvature = o.curvature;

  const ModelConfig base = to_model(o.model);
  for (const auto& w : obs.warnings) out << "warning: " << w << "\n";
  const FitResult fit = maximize(obs, bounds, opt, base, settings, sites.dimension());

  json report = fit_to_json(fit);
  report["command"] = "estimate";
  report["options"] = options_json(o.model);
  report["observations"] = {{"file", o.obs_file},
                            {"blocks", blocks.blocks()},
                            {"sites", blocks.sites()},
                            {"ks", ks},
                            {"terms", obs.entries.size()},
                            {"warnings", obs.warnings}};
  report["settings"] = {{"n_sim", o.n_sim},          {"seed", o.common.seed},     {"isotropic", o.isotropic},
                        {"grid_points", o.grid_points}, {"starts", o.starts},       {"tolerance", o.tolerance},
                        {"max_evaluations", o.max_evaluations}};
  report["bounds"] = {{"variance", o.variance_bounds}, {"c", o.c_bounds}, {"d", o.d_bounds}};
  const auto dir = output_dir(o.common);
  write_text_file(dir / "fit.json", dump(report));

  out << "theta_hat: variance=" << fit.theta_hat.variance << " c=" << fit.theta_hat.c << " d=" << fit.theta_hat.d
      << "  loglik=" << fit.loglik << "  evaluations=" << fit.evaluations << "\n";
  for (const auto& w : fit.warnings) out << "warning: " << w << "\n";
  return fit.converged ? kSuccess : kNotConverged;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and inference for event-controlled random fields of maxima", "maxfield"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value configuration file; flags override it");

  SimulateOptions sim_o;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate block maxima and write one CSV per block size");
  add_common(sim_cmd, sim_o.common);
  add_model(sim_cmd, sim_o.model);
  sim_cmd->add_option("--k", sim_o.ks, "Block sizes")->delimiter(',')->capture_default_str();
  sim_cmd->add_option("--n", sim_o.n, "Replicates")->capture_default_str();

  TauCurveOptions tau_o;
  auto* tau_cmd = app.add_subcommand("tau-curve", "Kendall tau against distance for each block size");
  add_common(tau_cmd, tau_o.common);
  add_model(tau_cmd, tau_o.model);
  tau_cmd->add_option("--k", tau_o.ks, "Block sizes")->delimiter(',')->capture_default_str();
  tau_cmd->add_option("--n", tau_o.n, "Replicates")->capture_default_str();
  tau_cmd->add_option("--pairs", tau_o.pairs, "reference (site 0 against the rest) or all")->capture_default_str();

  MarginsOptions mar_o;
  auto* mar_cmd = app.add_subcommand("margins-test", "Gumbel fits and Anderson-Darling tests per site");
  add_common(mar_cmd, mar_o.common);
  add_model(mar_cmd, mar_o.model);
  mar_cmd->add_option("--k", mar_o.k, "Block size")->capture_default_str();
  mar_cmd->add_option("--n", mar_o.n, "Replicates")->capture_default_str();
  mar_cmd->add_option("--sample", mar_o.sample_file, "Test an existing sample CSV instead of simulating");
  mar_cmd->add_option("--case", mar_o.test_case, "specified or known-scale (default by construction)");
  mar_cmd->add_option("--null-location", mar_o.null_location, "Null location (default: the analytic margin)");
  mar_cmd->add_option("--null-scale", mar_o.null_scale, "Null scale")->capture_default_str();

  Table1Options t1_o;
  auto* t1_cmd = app.add_subcommand("table1", "Fixed-scale location fits of the shape construction");
  add_common(t1_cmd, t1_o.common);
  add_model(t1_cmd, t1_o.model);
  t1_cmd->add_option("--n", t1_o.n, "Replicates per cell")->capture_default_str();

  EstimateOptions est_o;
  auto* est_cmd = app.add_subcommand("estimate", "Composite-likelihood fit of the link parameters");
  add_common(est_cmd, est_o.common);
  add_model(est_cmd, est_o.model);
  est_cmd->add_option("--obs", est_o.obs_file, "Observed CSV with columns block_index,site,value");
  est_cmd->add_option("--k", est_o.ks, "Block sizes")->delimiter(',')->capture_default_str();
  est_cmd->add_option("--n-sim", est_o.n_sim, "Simulated replicates per tau term")->capture_default_str();
  est_cmd->add_flag("--isotropic", est_o.isotropic, "Interpolate simulated tau over a distance grid");
  est_cmd->add_option("--grid-points", est_o.grid_points, "Isotropic grid size")->capture_default_str();
  est_cmd->add_option("--free", est_o.free, "Free parameters")->delimiter(',')->capture_default_str();
  est_cmd->add_option("--variance-bounds", est_o.variance_bounds, "lower,upper")
      ->expected(2)->delimiter(',')->capture_default_str();
  est_cmd->add_option("--c-bounds", est_o.c_bounds, "lower,upper")->expected(2)->delimiter(',')->capture_default_str();
  est_cmd->add_option("--d-bounds", est_o.d_bounds, "lower,upper")->expected(2)->delimiter(',')->capture_default_str();
  est_cmd->add_option("--starts", est_o.starts, "Multistart count")->capture_default_str();
  est_cmd->add_option("--tol", est_o.tolerance, "Simplex diameter tolerance (unit box)")->capture_default_str();
  est_cmd->add_option("--max-evals", est_o.max_evaluations, "Evaluation budget per start")->capture_default_str();
  est_cmd->add_option("--min-blocks", est_o.min_blocks, "Minimum aggregated blocks per block size")
      ->capture_default_str();
  est_cmd->add_flag("!--no-curvature", est_o.curvature, "Skip the curvature diagnostic");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (*sim_cmd) return cmd_simulate(sim_o, out);
    if (*tau_cmd) return cmd_tau_curve(tau_o, out);
    if (*mar_cmd) return cmd_margins_test(mar_o, out);
    if (*t1_cmd) return cmd_table1(t1_o, out);
    if (*est_cmd) return cmd_estimate(est_o, out);
  } catch (const SimulationRefused& e) {
    err << "simulation refused: " << e.what() << "\n";
    return kSimulationRefused;
  } catch (const AllStartsInfeasible& e) {
    err << "simulation refused: " << e.what() << "\n";
    return kSimulationRefused;
  } catch (const FactorizationError& e) {
    err << "simulation refused: " << e.what() << "\n";
    return kSimulationRefused;
  } catch (const ConvergenceError& e) {
    err << "not converged: " << e.what() << "\n";
    return kNotConverged;
  } catch (const ConstantSiteError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const CsvError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace maxfield::cli
