#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "maxfield/constructions.hpp"
#include "maxfield/dependence.hpp"
#include "maxfield/geometry.hpp"
#include "maxfield/nelder_mead.hpp"

namespace maxfield {

// ---- observed data ---------------------------------------------------------

/// Per-site series of block maxima (e.g. annual maxima), indexed by block.
struct ObservedBlocks {
  std::vector<std::vector<double>> values;  // values[site][block]

  std::size_t sites() const { return values.size(); }
  std::size_t blocks() const { return values.empty() ? 0 : values.front().size(); }
};

/// Reads `block_index,site,value` rows. Every (block, site) cell must be
/// present exactly once; blocks are ordered by block_index. Throws CsvError
/// carrying the offending line.
ObservedBlocks parse_observed_csv(std::string_view text, std::string_view source = "<memory>");
ObservedBlocks read_observed_csv(const std::filesystem::path& path);
std::string observed_to_csv(const ObservedBlocks& blocks);

/// Maxima of consecutive non-overlapping groups of k blocks; an incomplete
/// trailing group is dropped.
std::vector<double> aggregate_blocks(std::span<const double> values, int k);

struct ObservedTau {
  SitePair pair;
  int k = 1;
  double h = 0.0;
  TauEstimate estimate;
};

struct ObservedTauSet {
  std::vector<ObservedTau> entries;
  std::vector<int> ks;
  std::vector<std::string> warnings;

  double min_distance() const;
  double max_distance() const;
};

/// A site whose aggregated series is constant, so tau is undefined.
class ConstantSiteError : public std::invalid_argument {
 public:
  ConstantSiteError(std::size_t site, int k)
      : std::invalid_argument("site " + std::to_string(site) + " is constant at block size " + std::to_string(k) +
                              "; Kendall's tau is undefined"),
        site_(site),
        k_(k) {}
  std::size_t site() const { return site_; }
  int k() const { return k_; }

 private:
  std::size_t site_;
  int k_;
};

/// Tau and its variance for every unordered site pair and every k. Pairs
/// with fewer than min_n aggregated blocks at some k are skipped with a warning.
ObservedTauSet observed_tau_set(const ObservedBlocks& blocks, const SiteSet& sites, std::span<const int> ks,
                                std::size_t min_n = 10);

// ---- parameters ------------------------------------------------------------

/// theta_y = variance (Gaussian constructions; the shape family is fixed by
/// the base model), theta_m = (c, d).
struct ThetaVector {
  double variance = 1.0;
  double c = 0.0;
  double d = 0.0;
};

struct ParamSpec {
  bool free = false;
  double lower = 0.0;
  double upper = 0.0;
};

struct ThetaBounds {
  ThetaVector fixed;  ///< values of parameters that are not free
  ParamSpec variance{false, 0.05, 9.0};
  ParamSpec c{true, -2.0, 6.0};
  ParamSpec d{true, -1.5, 1.5};

  std::vector<std::string> free_names() const;
  /// Maps a point of the unit box over the free parameters to theta.
  ThetaVector from_unit(std::span<const double> x) const;
  void validate() const;
};

ModelConfig apply_theta(const ModelConfig& base, const ThetaVector& theta);

// ---- simulated tau ---------------------------------------------------------

struct SimulationSettings {
  std::size_t n_sim = 2000;
  std::uint64_t seed = 1;
  bool isotropic = false;
  std::size_t grid_points = 8;
  std::vector<double> grid;  ///< explicit isotropic grid; overrides grid_points
  unsigned threads = 0;
};

/// Stream seed for the simulated tau at distance h and block size k. Equal
/// distances share streams, so a pair and a grid knot at the same distance
/// see identical draws.
std::uint64_t term_seed(std::uint64_t seed, int k, double h);

/// Kendall tau of n_sim simulated (Z_k(0), Z_k(h e_1)) pairs. By
/// stationarity and isotropy this is the pair law of any two sites at
/// distance h. Replicates use streams (term_seed(seed, k, h), 0..n_sim-1).
TauEstimate simulate_tau(const ModelConfig& model, double h, int k, std::size_t n_sim, std::uint64_t seed,
                         std::size_t dimension = 1, unsigned threads = 1);

/// simulate_tau at each grid distance, wrapped as an interpolator.
TauInterpolator simulate_tau_isotropic(const ModelConfig& model, std::span<const double> grid, int k,
                                       std::size_t n_sim, std::uint64_t seed, std::size_t dimension = 1,
                                       unsigned threads = 0);

/// Grid used in isotropic mode: settings.grid if given (must cover the
/// observed distances), else grid_points evenly spaced over the observed range.
std::vector<double> isotropic_grid(const ObservedTauSet& obs, const SimulationSettings& settings);

// ---- composite likelihood --------------------------------------------------

/// log phi((tau_obs - tau_sim) / sqrt(var_obs + var_sim)).
double composite_term(double tau_obs, double var_obs, double tau_sim, double var_sim);

struct LoglikResult {
  double value = 0.0;
  bool feasible = true;
  std::size_t terms = 0;
  std::string infeasible_reason;
};

/// Pairwise log-likelihood summed over k and unordered site pairs (half
/// the ordered-pair sum). Deterministic in (theta, settings.seed).
/// A configuration the simulator refuses gives -infinity and feasible = false.
LoglikResult composite_loglik(const ThetaVector& theta, const ObservedTauSet& obs, const ModelConfig& base,
                              const SimulationSettings& settings, std::size_t dimension = 1);

// ---- maximization ----------------------------------------------------------

struct OptimizerConfig {
  std::size_t starts = 5;
  NelderMeadOptions simplex{0.15, 1e-3, 80};
  double curvature_step = 0.05;
  double condition_warning = 1e6;
  bool curvature = true;
};

struct TraceEntry {
  std::size_t evaluation = 0;
  std::size_t start = 0;
  ThetaVector theta;
  double loglik = 0.0;
};

struct FitResult {
  ThetaVector theta_hat;
  double loglik = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::vector<TraceEntry> trace;
  std::vector<std::string> free_parameters;
  double curvature_condition = 0.0;  ///< of the numerical Hessian in unit-box coordinates
  std::vector<std::string> warnings;
};

class AllStartsInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Multistart derivative-free simplex search in the unit box over the free
/// parameters. Starts are Halton points 1..starts.
FitResult maximize(const ObservedTauSet& obs, const ThetaBounds& bounds, const OptimizerConfig& options,
                   const ModelConfig& base, const SimulationSettings& settings, std::size_t dimension = 1);

nlohmann::json fit_to_json(const FitResult& fit);

}  // namespace maxfield
