#include "maxfield/inference.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "maxfield/io.hpp"
#include "maxfield/parallel.hpp"

namespace maxfield {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

// ---- observed data ---------------------------------------------------------

ObservedBlocks parse_observed_csv(std::string_view text, std::string_view source) {
  const CsvTable table = parse_csv(text, source);
  if (!table.header.empty()) {
    const std::vector<std::string> expected{"block_index", "site", "value"};
    if (table.header != expected) {
      throw CsvError(std::string(source) + ": line 1: header must be block_index,site,value", 1);
    }
  }
  // (block, site) -> (value, line)
  std::map<long long, std::map<long long, std::pair<double, std::size_t>>> cells;
  long long max_site = -1;
  for (const auto& row : table.rows) {
    if (row.fields.size() != 3) {
      throw CsvError(std::string(source) + ": line " + std::to_string(row.line) + ": expected 3 fields", row.line);
    }
    const long long block = parse_integer(row.fields[0], row.line, 0);
    const long long site = parse_integer(row.fields[1], row.line, 1);
    const double value = parse_double(row.fields[2], row.line, 2);
    if (site < 0) throw CsvError(std::string(source) + ": line " + std::to_string(row.line) + ": negative site index", row.line);
    if (!std::isfinite(value)) throw CsvError(std::string(source) + ": line " + std::to_string(row.line) + ": non-finite value", row.line);
    auto [it, inserted] = cells[block].emplace(site, std::make_pair(value, row.line));
    if (!inserted) {
      throw CsvError(std::string(source) + ": line " + std::to_string(row.line) + ": duplicate (block, site) = (" +
                         std::to_string(block) + ", " + std::to_string(site) + ")",
                     row.line);
    }
    max_site = std::max(max_site, site);
  }
  if (cells.empty()) throw CsvError(std::string(source) + ": no observations", 0);

  const auto sites = static_cast<std::size_t>(max_site + 1);
  ObservedBlocks out;
  out.values.assign(sites, {});
  for (const auto& [block, row] : cells) {
    if (row.size() != sites) {
      const std::size_t line = row.begin()->second.second;
      throw CsvError(std::string(source) + ": line " + std::to_string(line) + ": block " + std::to_string(block) +
                         " has " + std::to_string(row.size()) + " of " + std::to_string(sites) + " sites",
                     line);
    }
    for (const auto& [site, cell] : row) out.values[static_cast<std::size_t>(site)].push_back(cell.first);
  }
  return out;
}

ObservedBlocks read_observed_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open " + path.string(), 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_observed_csv(buf.str(), path.string());
}

std::string observed_to_csv(const ObservedBlocks& blocks) {
  std::string out = "block_index,site,value\n";
  for (std::size_t b = 0; b < blocks.blocks(); ++b)
    for (std::size_t s = 0; s < blocks.sites(); ++s)
      out += std::to_string(b) + ',' + std::to_string(s) + ',' + format_double(blocks.values[s][b]) + '\n';
  return out;
}

std::vector<double> aggregate_blocks(std::span<const double> values, int k) {
  if (k < 1) throw std::invalid_argument("aggregate_blocks: k must be >= 1");
  const std::size_t groups = values.size() / static_cast<std::size_t>(k);
  std::vector<double> out(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    const auto first = values.begin() + static_cast<std::ptrdiff_t>(g * static_cast<std::size_t>(k));
    out[g] = *std::max_element(first, first + k);
  }
  return out;
}

double ObservedTauSet::min_distance() const {
  double h = kInf;
  for (const auto& e : entries) h = std::min(h, e.h);
  return h;
}

double ObservedTauSet::max_distance() const {
  double h = -kInf;
  for (const auto& e : entries) h = std::max(h, e.h);
  return h;
}

ObservedTauSet observed_tau_set(const ObservedBlocks& blocks, const SiteSet& sites, std::span<const int> ks,
                                std::size_t min_n) {
  if (blocks.sites() != sites.size()) {
    throw std::invalid_argument("observed data has " + std::to_string(blocks.sites()) + " sites but the site file has " +
                                std::to_string(sites.size()));
  }
  if (sites.size() < 2) throw std::invalid_argument("observed data needs at least 2 sites");
  ObservedTauSet set;
  set.ks.assign(ks.begin(), ks.end());
  const auto pairs = all_pairs(sites.size());
  for (int k : ks) {
    std::vector<std::vector<double>> agg(sites.size());
    for (std::size_t s = 0; s < sites.size(); ++s) {
      agg[s] = aggregate_blocks(blocks.values[s], k);
      if (agg[s].size() >= 2 && std::all_of(agg[s].begin(), agg[s].end(), [&](double v) { return v == agg[s].front(); })) {
        throw ConstantSiteError(s, k);
      }
    }
    const std::size_t n = agg.front().size();
    if (n < min_n) {
      set.warnings.push_back("block size " + std::to_string(k) + " leaves " + std::to_string(n) + " < " +
                             std::to_string(min_n) + " aggregated blocks; its pairs are excluded");
      continue;
    }
    for (const auto& pr : pairs) {
      set.entries.push_back({pr, k, sites.distance(pr.i, pr.j), kendall_tau(agg[pr.i], agg[pr.j])});
    }
  }
  if (set.entries.empty()) throw std::invalid_argument("no usable (pair, k) terms in the observed data");
  return set;
}

// ---- parameters ------------------------------------------------------------

std::vector<std::string> ThetaBounds::free_names() const {
  std::vector<std::string> names;
  if (variance.free) names.emplace_back("variance");
  if (c.free) names.emplace_back("c");
  if (d.free) names.emplace_back("d");
  return names;
}

ThetaVector ThetaBounds::from_unit(std::span<const double> x) const {
  ThetaVector t = fixed;
  std::size_t i = 0;
  auto take = [&](const ParamSpec& spec, double& out) {
    if (!spec.free) return;
    out = spec.lower + (spec.upper - spec.lower) * std::clamp(x[i++], 0.0, 1.0);
  };
  take(variance, t.variance);
  take(c, t.c);
  take(d, t.d);
  return t;
}

void ThetaBounds::validate() const {
  for (const ParamSpec* p : {&variance, &c, &d}) {
    if (p->free && !(p->upper > p->lower)) throw std::invalid_argument("parameter bounds must satisfy lower < upper");
  }
  if (variance.free && !(variance.lower > 0.0)) throw std::invalid_argument("variance lower bound must be > 0");
  if (free_names().empty()) throw std::invalid_argument("no free parameters to estimate");
}

ModelConfig apply_theta(const ModelConfig& base, const ThetaVector& theta) {
  ModelConfig m = base;
  m.variance = theta.variance;
  m.link = {theta.c, theta.d};
  return m;
}

// ---- simulated tau ---------------------------------------------------------

std::uint64_t term_seed(std::uint64_t seed, int k, double h) {
  return mix_seed(mix_seed(seed, static_cast<std::uint64_t>(k)), std::bit_cast<std::uint64_t>(h + 0.0));
}

TauEstimate simulate_tau(const ModelConfig& model, double h, int k, std::size_t n_sim, std::uint64_t seed,
                         std::size_t dimension, unsigned threads) {
  if (n_sim < 2) throw std::invalid_argument("simulate_tau: n_sim must be >= 2");
  if (!(h >= 0.0)) throw std::invalid_argument("simulate_tau: distance must be >= 0");
  Site a{std::vector<double>(dimension, 0.0)};
  Site b = a;
  b.coords[0] = h;
  const SiteSet sites(std::vector<Site>{a, b});
  const auto sim = make_simulator(sites, model);
  const auto sample = simulate_sample(*sim, k, n_sim, term_seed(seed, k, h), 0, threads);
  return kendall_tau(sample.column(0), sample.column(1));
}

TauInterpolator simulate_tau_isotropic(const ModelConfig& model, std::span<const double> grid, int k,
                                       std::size_t n_sim, std::uint64_t seed, std::size_t dimension,
                                       unsigned threads) {
  std::vector<std::pair<double, double>> knots(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t g) {
    knots[g] = {grid[g], simulate_tau(model, grid[g], k, n_sim, seed, dimension, 1).tau};
  });
  return TauInterpolator(std::move(knots));
}

std::vector<double> isotropic_grid(const ObservedTauSet& obs, const SimulationSettings& settings) {
  const double lo = obs.min_distance();
  const double hi = obs.max_distance();
  if (!settings.grid.empty()) {
    std::vector<double> g = settings.grid;
    if (!std::is_sorted(g.begin(), g.end())) throw std::invalid_argument("isotropic grid must be sorted");
    if (g.front() > lo || g.back() < hi) {
      throw std::invalid_argument("isotropic grid [" + format_double(g.front()) + ", " + format_double(g.back()) +
                                  "] is narrower than the observed distance range [" + format_double(lo) + ", " +
                                  format_double(hi) + "]");
    }
    return g;
  }
  if (settings.grid_points < 1) throw std::invalid_argument("isotropic grid needs at least one point");
  if (hi - lo <= 1e-12 * std::max(1.0, hi) || settings.grid_points == 1) {
    if (hi != lo) throw std::invalid_argument("a one-point grid cannot cover distinct observed distances");
    return {lo};
  }
  std::vector<double> g(settings.grid_points);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = i + 1 == g.size() ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(g.size() - 1);
  }
  return g;
}

// ---- composite likelihood --------------------------------------------------

double composite_term(double tau_obs, double var_obs, double tau_sim, double var_sim) {
  const double sd = std::sqrt(var_obs + var_sim);
  if (!(sd > 0.0)) throw std::invalid_argument("composite_term: total variance must be > 0");
  const double z = (tau_obs - tau_sim) / sd;
  return -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * z * z;
}

LoglikResult composite_loglik(const ThetaVector& theta, const ObservedTauSet& obs, const ModelConfig& base,
                              const SimulationSettings& settings, std::size_t dimension) {
  if (settings.n_sim < 100) throw std::invalid_argument("composite_loglik: n_sim must be >= 100");
  const ModelConfig model = apply_theta(base, theta);
  LoglikResult result;

  // distinct (k, distance) points to simulate
  std::vector<std::pair<int, double>> points;
  std::vector<double> grid;
  if (settings.isotropic) {
    grid = isotropic_grid(obs, settings);
    for (int k : obs.ks)
      for (double h : grid) points.emplace_back(k, h);
  } else {
    for (const auto& e : obs.entries) points.emplace_back(e.k, e.h);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
  }

  std::vector<double> taus(points.size());
  try {
    // validate the configuration once before fanning out
    make_simulator(SiteSet(std::vector<Site>{Site{std::vector<double>(dimension, 0.0)}}), model);
    parallel_for(points.size(), settings.threads, [&](std::size_t q) {
      taus[q] = simulate_tau(model, points[q].second, points[q].first, settings.n_sim, settings.seed, dimension, 1).tau;
    });
  } catch (const SimulationRefused& e) {
    return {-kInf, false, 0, e.what()};
  } catch (const FactorizationError& e) {
    return {-kInf, false, 0, e.what()};
  }

  const double var_sim = tau_variance(settings.n_sim);
  auto lookup_exact = [&](int k, double h) {
    const auto it = std::lower_bound(points.begin(), points.end(), std::make_pair(k, h));
    return taus[static_cast<std::size_t>(it - points.begin())];
  };
  std::map<int, TauInterpolator> curves;
  if (settings.isotropic) {
    for (std::size_t ki = 0; ki < obs.ks.size(); ++ki) {
      std::vector<std::pair<double, double>> knots;
      for (std::size_t g = 0; g < grid.size(); ++g) knots.emplace_back(grid[g], taus[ki * grid.size() + g]);
      curves.emplace(obs.ks[ki], TauInterpolator(std::move(knots)));
    }
  }

  for (const auto& e : obs.entries) {
    const double tau_sim = settings.isotropic ? curves.at(e.k)(e.h) : lookup_exact(e.k, e.h);
    result.value += composite_term(e.estimate.tau, e.estimate.variance, tau_sim, var_sim);
    ++result.terms;
  }
  return result;
}

// ---- maximization ----------------------------------------------------------

namespace {

double condition_number(const Eigen::MatrixXd& hessian) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessian);
  const auto abs_vals = eig.eigenvalues().cwiseAbs();
  const double lo = abs_vals.minCoeff();
  const double hi = abs_vals.maxCoeff();
  if (!(lo > 0.0)) return kInf;
  return hi / lo;
}

}  // namespace

FitResult maximize(const ObservedTauSet& obs, const ThetaBounds& bounds, const OptimizerConfig& options,
                   const ModelConfig& base, const SimulationSettings& settings, std::size_t dimension) {
  bounds.validate();
  if (options.starts < 1) throw std::invalid_argument("maximize: need at least one start");
  const auto names = bounds.free_names();
  const std::size_t p = names.size();

  FitResult fit;
  fit.free_parameters = names;
  std::size_t start_index = 0;
  auto objective = [&](const std::vector<double>& x) {
    const auto r = composite_loglik(bounds.from_unit(x), obs, base, settings, dimension);
    return r.feasible ? -r.value : kInf;
  };
  auto record = [&](const std::vector<double>& x, double v) {
    fit.trace.push_back({fit.trace.size() + 1, start_index, bounds.from_unit(x), -v});
  };

  double best = kInf;
  std::vector<double> best_x;
  bool best_converged = false;
  for (start_index = 0; start_index < options.starts; ++start_index) {
    const auto start = halton_point(start_index + 1, p);
    const auto r = nelder_mead_box(objective, start, options.simplex, record);
    fit.evaluations += r.evaluations;
    if (r.value < best) {
      best = r.value;
      best_x = r.x;
      best_converged = r.converged;
    }
  }
  if (!std::isfinite(best)) throw AllStartsInfeasible("every start point is infeasible for the simulator");

  fit.theta_hat = bounds.from_unit(best_x);
  fit.loglik = -best;
  fit.converged = best_converged;
  if (!best_converged) fit.warnings.push_back("evaluation budget exhausted before the simplex converged");

  if (options.curvature) {
    // central differences of the objective in unit-box coordinates
    const double h = options.curvature_step;
    std::vector<double> centre = best_x;
    for (double& v : centre) v = std::clamp(v, h, 1.0 - h);
    const double f0 = objective(centre);
    Eigen::MatrixXd hess(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    auto at = [&](std::size_t i, double di, std::size_t j, double dj) {
      auto x = centre;
      x[i] += di;
      x[j] += dj;
      return objective(x);
    };
    for (std::size_t i = 0; i < p; ++i) {
      hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = (at(i, h, i, 0) - 2.0 * f0 + at(i, -h, i, 0)) / (h * h);
      for (std::size_t j = i + 1; j < p; ++j) {
        const double v = (at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h) + at(i, -h, j, -h)) / (4.0 * h * h);
        hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        hess(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
      }
    }
    fit.curvature_condition = hess.allFinite() ? condition_number(hess) : kInf;
    if (!(fit.curvature_condition <= options.condition_warning)) {
      fit.warnings.push_back("curvature condition number " + format_double(fit.curvature_condition) +
                             " exceeds " + format_double(options.condition_warning) +
                             "; some parameters may be unidentifiable");
    }
  }
  return fit;
}

nlohmann::json fit_to_json(const FitResult& fit) {
  auto theta_json = [](const ThetaVector& t) { return nlohmann::json{{"variance", t.variance}, {"c", t.c}, {"d", t.d}}; };
  nlohmann::json j;
  j["theta_hat"] = theta_json(fit.theta_hat);
  j["free_parameters"] = fit.free_parameters;
  j["loglik"] = fit.loglik;
  j["loglik_convention"] = "sum over unordered pairs (half the ordered-pair sum)";
  j["evaluations"] = fit.evaluations;
  j["converged"] = fit.converged;
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& e : fit.trace) {
    trace.push_back({{"evaluation", e.evaluation},
                     {"start", e.start},
                     {"theta", theta_json(e.theta)},
                     {"loglik", std::isfinite(e.loglik) ? nlohmann::json(e.loglik) : nlohmann::json(nullptr)}});
  }
  j["trace"] = trace;
  j["diagnostics"] = {{"curvature_condition",
                       std::isfinite(fit.curvature_condition) ? nlohmann::json(fit.curvature_condition)
                                                              : nlohmann::json("inf")},
                      {"warnings", fit.warnings}};
  return j;
}

}  // namespace maxfield
