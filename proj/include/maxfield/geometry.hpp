#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace maxfield {

/// A point in R^d.
struct Site {
  std::vector<double> coords;

  std::size_t dimension() const { return coords.size(); }
};

/// Euclidean distance matrix of a list of sites.
///
/// Throws std::invalid_argument on an empty list, on sites of differing
/// dimension, or on non-finite coordinates.
Eigen::MatrixXd pairwise_distances(std::span<const Site> sites);

/// Ordered set of evaluation points with their precomputed distances.
class SiteSet {
 public:
  explicit SiteSet(std::vector<Site> sites);

  /// Sites on the real line.
  static SiteSet on_line(std::span<const double> xs);

  std::size_t size() const { return sites_.size(); }
  std::size_t dimension() const { return sites_.front().dimension(); }
  const Site& operator[](std::size_t i) const { return sites_[i]; }
  const std::vector<Site>& sites() const { return sites_; }

  double distance(std::size_t i, std::size_t j) const { return distances_(i, j); }
  const Eigen::MatrixXd& distances() const { return distances_; }
  double max_distance() const { return distances_.maxCoeff(); }

 private:
  std::vector<Site> sites_;
  Eigen::MatrixXd distances_;
};

/// Reads sites from CSV, one row per site with columns x1,...,xd. A header
/// row is skipped when its first field is not numeric.
SiteSet load_sites_csv(const std::filesystem::path& path);

}  // namespace maxfield
