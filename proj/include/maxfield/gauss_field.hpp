#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Dense>

#include "maxfield/geometry.hpp"
#include "maxfield/magnitude_link.hpp"
#include "maxfield/rng.hpp"

namespace maxfield {

/// Stationary Gaussian process with exponential correlation whose length
/// scale is set by the event magnitude. The mean is always -variance/2 so
/// that E exp(Y) = 1.
struct GaussConfig {
  double variance = 1.0;
  MagnitudeLink link;

  double mean() const { return -0.5 * variance; }
  void validate() const;
};

/// rho(h; m) = exp(-h / exp(d (m - c))).
double correlation(double h, double m, const MagnitudeLink& link);

Eigen::MatrixXd build_covariance(const SiteSet& sites, double m, const GaussConfig& cfg);

/// Lower Cholesky factor and the diagonal jitter (relative to the variance)
/// that was needed to obtain it.
struct Factor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};

class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cholesky with escalating diagonal jitter 1e-12, 1e-11, ..., 1e-6 times
/// the mean diagonal; throws FactorizationError beyond that.
Factor factorize_covariance(const Eigen::MatrixXd& cov);

/// Cholesky factors keyed by quantized magnitude, shared between threads.
///
/// Magnitudes are rounded to the grid delta_m * Z and the covariance is
/// built at the rounded magnitude. delta_m = 0 disables caching. With an
/// inactive link every magnitude maps to one entry. Lookups in the common
/// range are a single atomic load; inserts are compare-and-swap, so
/// concurrent misses on one key may both factorize but only one result is
/// kept. The stored factor is a deterministic function of the key.
class FactorizationCache {
 public:
  struct Stats {
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t entries = 0;
    double max_jitter = 0.0;
  };

  FactorizationCache(const SiteSet& sites, GaussConfig cfg, double delta_m);
  ~FactorizationCache();
  FactorizationCache(const FactorizationCache&) = delete;
  FactorizationCache& operator=(const FactorizationCache&) = delete;

  /// Factor for magnitude m. When caching is disabled the factor is built
  /// into `scratch` and a reference to it is returned.
  const Factor& get(double m, Factor& scratch) const;

  bool enabled() const { return delta_m_ > 0.0; }
  double delta_m() const { return delta_m_; }
  /// Magnitude at which the covariance for m is actually built.
  double quantize(double m) const;
  /// Upper bound on |rho(h; m) - rho(h; quantize(m))| over the site set:
  /// h_max |d| delta_m exp(|d| |m - c|).
  double perturbation_bound(double m) const;
  Stats stats() const;
  const GaussConfig& config() const { return cfg_; }

 private:
  std::int64_t key(double m) const;
  Factor compute(double m) const;
  void note_jitter(double j) const;

  Eigen::MatrixXd distances_;
  GaussConfig cfg_;
  double delta_m_;
  double h_max_;

  std::int64_t slot_lo_ = 0;
  std::size_t slot_count_ = 0;
  std::unique_ptr<std::atomic<Factor*>[]> slots_;
  mutable std::mutex overflow_mutex_;
  mutable std::unordered_map<std::int64_t, std::unique_ptr<Factor>> overflow_;

  mutable std::atomic<std::uint64_t> hits_{0};
  mutable std::atomic<std::uint64_t> misses_{0};
  mutable std::atomic<std::uint64_t> entries_{0};
  mutable std::atomic<double> max_jitter_{0.0};
};

/// out = mean + L eps, eps standard normal drawn from rng.
void simulate_gauss(const Factor& factor, double mean, RngStream& rng, std::span<double> out);

/// One draw of Y at every site for magnitude m (no caching).
Eigen::VectorXd simulate_gauss_field(const SiteSet& sites, double m, const GaussConfig& cfg, RngStream& rng);

}  // namespace maxfield
