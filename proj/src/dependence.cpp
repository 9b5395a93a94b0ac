#include "maxfield/dependence.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "maxfield/io.hpp"
#include "maxfield/parallel.hpp"

namespace maxfield {
namespace {

// Sorts a[lo, hi) and returns the number of inversions.
std::uint64_t sort_count(std::vector<std::uint32_t>& a, std::vector<std::uint32_t>& buf, std::size_t lo,
                         std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = sort_count(a, buf, lo, mid) + sort_count(a, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (a[j] < a[i]) {
      inv += mid - i;
      buf[k++] = a[j++];
    } else {
      buf[k++] = a[i++];
    }
  }
  while (i < mid) buf[k++] = a[i++];
  while (j < hi) buf[k++] = a[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            a.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

// Dense ranks (ties share a rank) and the number of tied pairs.
std::vector<std::uint32_t> dense_ranks(std::span<const double> x, std::uint64_t& tied_pairs) {
  std::vector<std::uint32_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) { return x[a] < x[b]; });
  std::vector<std::uint32_t> rank(x.size());
  tied_pairs = 0;
  std::uint32_t r = 0;
  std::uint64_t run = 1;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i > 0 && x[idx[i]] == x[idx[i - 1]]) {
      ++run;
    } else {
      tied_pairs += run * (run - 1) / 2;
      run = 1;
      if (i > 0) ++r;
    }
    rank[idx[i]] = r;
  }
  tied_pairs += run * (run - 1) / 2;
  return rank;
}

}  // namespace

double tau_variance(std::size_t n) {
  if (n < 2) throw std::invalid_argument("tau_variance: n must be >= 2");
  const double nn = static_cast<double>(n);
  return 2.0 * (2.0 * nn + 5.0) / (9.0 * nn * (nn - 1.0));
}

TauEstimate kendall_tau(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("kendall_tau: arguments differ in length");
  const std::size_t n = u.size();
  if (n < 2) throw std::invalid_argument("kendall_tau: need at least 2 observations");
  if (n > std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("kendall_tau: sample too large");

  // Knight's algorithm: sort by (u, v), count strict inversions of v
  std::uint64_t ties_u = 0, ties_v = 0;
  const auto ru = dense_ranks(u, ties_u);
  const auto rv = dense_ranks(v, ties_v);
  const std::uint64_t all = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (ties_u == all || ties_v == all) throw std::invalid_argument("kendall_tau: constant input, tau undefined");

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return ru[a] != ru[b] ? ru[a] < ru[b] : rv[a] < rv[b];
  });
  std::uint64_t ties_both = 0, run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && ru[order[i]] == ru[order[i - 1]] && rv[order[i]] == rv[order[i - 1]]) {
      ++run;
    } else {
      ties_both += run * (run - 1) / 2;
      run = 1;
    }
  }
  std::vector<std::uint32_t> seq(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) seq[i] = rv[order[i]];
  const std::uint64_t discordant = sort_count(seq, buf, 0, n);
  const std::uint64_t concordant = all - ties_u - ties_v + ties_both - discordant;

  TauEstimate est;
  est.n = n;
  est.tau = (static_cast<double>(concordant) - static_cast<double>(discordant)) / static_cast<double>(all);
  est.variance = tau_variance(n);
  est.ties = ties_u + ties_v;
  return est;
}

std::vector<SitePair> all_pairs(std::size_t sites) {
  std::vector<SitePair> pairs;
  for (std::size_t i = 0; i < sites; ++i)
    for (std::size_t j = i + 1; j < sites; ++j) pairs.push_back({i, j});
  return pairs;
}

std::vector<SitePair> reference_pairs(std::size_t sites, std::size_t reference) {
  if (reference >= sites) throw std::invalid_argument("reference_pairs: reference site out of range");
  std::vector<SitePair> pairs;
  for (std::size_t j = 0; j < sites; ++j)
    if (j != reference) pairs.push_back({reference, j});
  return pairs;
}

TauCurve tau_curve(const MaximaSample& sample, const SiteSet& sites, std::span<const SitePair> pairs,
                   unsigned threads) {
  if (sample.sites < 2 || sites.size() != sample.sites) {
    throw std::invalid_argument("tau_curve: sample needs >= 2 sites matching the site set");
  }
  std::vector<std::vector<double>> columns(sample.sites);
  for (std::size_t s = 0; s < sample.sites; ++s) columns[s] = sample.column(s);

  TauCurve curve(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t q) {
    const auto& pr = pairs[q];
    if (pr.i >= sample.sites || pr.j >= sample.sites) throw std::invalid_argument("tau_curve: pair out of range");
    curve[q].h = sites.distance(pr.i, pr.j);
    curve[q].k = sample.k;
    curve[q].pair = pr;
    curve[q].estimate = kendall_tau(columns[pr.i], columns[pr.j]);
  });
  return curve;
}

std::string tau_curve_to_csv(const TauCurve& curve) {
  std::string out = "h,k,tau,var,n,pair\n";
  for (const auto& e : curve) {
    out += format_double(e.h) + ',' + std::to_string(e.k) + ',' + format_double(e.estimate.tau) + ',' +
           format_double(e.estimate.variance) + ',' + std::to_string(e.estimate.n) + ',' + e.pair.id() + '\n';
  }
  return out;
}

TauInterpolator::TauInterpolator(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots)) {
  if (knots_.empty()) throw std::invalid_argument("TauInterpolator: empty grid");
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i].first > knots_[i - 1].first)) {
      throw std::invalid_argument("TauInterpolator: grid must be sorted with distinct distances");
    }
  }
}

double TauInterpolator::operator()(double h) const {
  if (h <= knots_.front().first) return knots_.front().second;
  if (h >= knots_.back().first) return knots_.back().second;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), h,
                                   [](double x, const std::pair<double, double>& k) { return x < k.first; });
  const auto& [h1, t1] = *(it - 1);
  const auto& [h2, t2] = *it;
  if (h == h1) return t1;
  const double w = (h - h1) / (h2 - h1);
  return t1 + w * (t2 - t1);
}

}  // namespace maxfield
