#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maxfield/constructions.hpp"
#include "maxfield/geometry.hpp"

namespace maxfield {

/// Kendall's tau-a with the null variance 2(2n+5) / (9n(n-1)).
/// Tied pairs count as neither concordant nor discordant. `ties` counts
/// tied pairs in either argument.
struct TauEstimate {
  double tau = 0.0;
  std::size_t n = 0;
  double variance = 0.0;
  std::size_t ties = 0;
};

/// O(n log n) merge count. Throws std::invalid_argument for unequal
/// lengths, n < 2, or a constant argument.
TauEstimate kendall_tau(std::span<const double> u, std::span<const double> v);

double tau_variance(std::size_t n);

struct SitePair {
  std::size_t i = 0;
  std::size_t j = 0;

  std::string id() const { return std::to_string(i) + "-" + std::to_string(j); }
  friend bool operator==(const SitePair&, const SitePair&) = default;
};

std::vector<SitePair> all_pairs(std::size_t sites);
/// (reference, j) for every other site j.
std::vector<SitePair> reference_pairs(std::size_t sites, std::size_t reference = 0);

struct TauCurveEntry {
  double h = 0.0;
  int k = 1;
  TauEstimate estimate;
  SitePair pair;
};

using TauCurve = std::vector<TauCurveEntry>;

/// Kendall tau of each selected site pair of a sample, keyed by distance.
TauCurve tau_curve(const MaximaSample& sample, const SiteSet& sites, std::span<const SitePair> pairs,
                   unsigned threads = 1);

/// CSV with header h,k,tau,var,n,pair.
std::string tau_curve_to_csv(const TauCurve& curve);

/// Piecewise-linear tau(h) through (distance, tau) knots, exact at the
/// knots and constant beyond the end knots. A single knot gives a constant.
class TauInterpolator {
 public:
  /// Knots must be strictly increasing in h.
  explicit TauInterpolator(std::vector<std::pair<double, double>> knots);

  double operator()(double h) const;
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

 private:
  std::vector<std::pair<double, double>> knots_;
};

}  // namespace maxfield
