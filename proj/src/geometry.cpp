#include "maxfield/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "maxfield/io.hpp"

namespace maxfield {

Eigen::MatrixXd pairwise_distances(std::span<const Site> sites) {
  if (sites.empty()) throw std::invalid_argument("pairwise_distances: empty site list");
  const std::size_t dim = sites.front().dimension();
  if (dim == 0) throw std::invalid_argument("pairwise_distances: sites need at least one coordinate");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i].dimension() != dim) {
      throw std::invalid_argument("pairwise_distances: site " + std::to_string(i) + " has dimension " +
                                  std::to_string(sites[i].dimension()) + ", expected " +
                                  std::to_string(dim));
    }
    for (double x : sites[i].coords) {
      if (!std::isfinite(x)) {
        throw std::invalid_argument("pairwise_distances: site " + std::to_string(i) +
                                    " has a non-finite coordinate");
      }
    }
  }

  const auto n = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double ss = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        const double diff = sites[i].coords[c] - sites[j].coords[c];
        ss += diff * diff;
      }
      dist(i, j) = dist(j, i) = std::sqrt(ss);
    }
  }
  return dist;
}

SiteSet::SiteSet(std::vector<Site> sites)
    : sites_(std::move(sites)), distances_(pairwise_distances(sites_)) {}

SiteSet SiteSet::on_line(std::span<const double> xs) {
  std::vector<Site> sites;
  sites.reserve(xs.size());
  for (double x : xs) sites.push_back(Site{{x}});
  return SiteSet(std::move(sites));
}

SiteSet load_sites_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  std::vector<Site> sites;
  std::size_t dim = 0;
  for (const auto& row : table.rows) {
    Site site;
    site.coords.reserve(row.fields.size());
    for (std::size_t c = 0; c < row.fields.size(); ++c) {
      site.coords.push_back(parse_double(row.fields[c], row.line, c));
    }
    if (sites.empty()) {
      dim = site.dimension();
    } else if (site.dimension() != dim) {
      throw CsvError(path.string() + ": line " + std::to_string(row.line) + ": expected " +
                         std::to_string(dim) + " coordinates, got " +
                         std::to_string(site.dimension()),
                     row.line);
    }
    sites.push_back(std::move(site));
  }
  if (sites.empty()) throw CsvError(path.string() + ": no sites", 0);
  return SiteSet(std::move(sites));
}

}  // namespace maxfield
