#include "maxfield/gumbel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/tools/roots.hpp>

namespace maxfield {
namespace {

constexpr double kClamp = 1e-12;

// log((1/n) sum exp(-x_i / b)), shifted by the sample minimum
double log_mean_exp_neg(std::span<const double> x, double b) {
  const double lo = *std::min_element(x.begin(), x.end());
  double sum = 0.0;
  for (double v : x) sum += std::exp(-(v - lo) / b);
  return -lo / b + std::log(sum / static_cast<double>(x.size()));
}

void check_sample(std::span<const double> sample, std::size_t min_size, const char* who) {
  if (sample.size() < min_size) {
    throw std::invalid_argument(std::string(who) + ": need at least " + std::to_string(min_size) +
                                " observations, got " + std::to_string(sample.size()));
  }
  for (double v : sample) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite observation");
  }
}

}  // namespace

void GumbelParams::validate() const {
  if (!std::isfinite(location)) throw std::invalid_argument("Gumbel location must be finite");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("Gumbel scale must be > 0 and finite");
}

double gumbel_cdf(double x, const GumbelParams& p) {
  p.validate();
  if (!std::isfinite(x)) throw std::invalid_argument("gumbel_cdf: x must be finite");
  return std::exp(-std::exp(-(x - p.location) / p.scale));
}

double gumbel_quantile(double u, const GumbelParams& p) {
  p.validate();
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("gumbel_quantile: u must lie in (0, 1)");
  return p.location - p.scale * std::log(-std::log(u));
}

LocationFit fit_location_known_scale(std::span<const double> sample, double scale) {
  check_sample(sample, 2, "fit_location_known_scale");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("fit_location_known_scale: scale must be > 0");
  const double a = -scale * log_mean_exp_neg(sample, scale);
  return {a, scale / std::sqrt(static_cast<double>(sample.size()))};
}

GumbelFit fit_gumbel_ml(std::span<const double> sample, int max_iterations) {
  check_sample(sample, 10, "fit_gumbel_ml");
  const double n = static_cast<double>(sample.size());
  double mean = 0.0;
  for (double v : sample) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : sample) var += (v - mean) * (v - mean);
  var /= n - 1.0;
  if (var <= 0.0) throw std::invalid_argument("fit_gumbel_ml: constant sample");
  const double lo = *std::min_element(sample.begin(), sample.end());

  // g(b) = b - mean + sum(x w) / sum(w) is increasing from lo - mean < 0 to +inf
  auto profile = [&](double b) {
    double sw = 0.0, sxw = 0.0;
    for (double v : sample) {
      const double w = std::exp(-(v - lo) / b);
      sw += w;
      sxw += (v - lo) * w;
    }
    return b - (mean - lo) + sxw / sw;
  };

  const double start = std::sqrt(6.0 * var) / std::numbers::pi;
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_iterations);
  boost::math::tools::eps_tolerance<double> tol(50);
  std::pair<double, double> bracket;
  try {
    bracket = boost::math::tools::bracket_and_solve_root(profile, start, 2.0, true, tol, iters);
  } catch (const std::exception& e) {
    throw ConvergenceError(std::string("fit_gumbel_ml: ") + e.what(), start);
  }
  const double b = 0.5 * (bracket.first + bracket.second);
  if (iters >= static_cast<std::uintmax_t>(max_iterations)) {
    throw ConvergenceError("fit_gumbel_ml: scale root not found within iteration budget", b);
  }

  GumbelFit fit;
  fit.params.scale = b;
  fit.params.location = -b * log_mean_exp_neg(sample, b);
  // inverse expected information: b^2/n * (1 + 6(1-gamma)^2/pi^2) and 6 b^2 / (pi^2 n)
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double one_minus_gamma = 1.0 - std::numbers::egamma;
  fit.se_location = b * std::sqrt((1.0 + 6.0 * one_minus_gamma * one_minus_gamma / pi2) / n);
  fit.se_scale = b * std::sqrt(6.0 / (pi2 * n));
  fit.iterations = static_cast<int>(iters);
  return fit;
}

double anderson_darling(std::span<const double> sample, const std::function<double(double)>& cdf) {
  check_sample(sample, 8, "anderson_darling");
  std::vector<double> u(sample.begin(), sample.end());
  std::sort(u.begin(), u.end());
  if (u.front() == u.back()) throw std::invalid_argument("anderson_darling: degenerate (constant) sample");
  for (double& v : u) v = std::clamp(cdf(v), kClamp, 1.0 - kClamp);

  const std::size_t n = u.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += static_cast<double>(2 * i + 1) * (std::log(u[i]) + std::log1p(-u[n - 1 - i]));
  }
  return -static_cast<double>(n) - sum / static_cast<double>(n);
}

double ad_critical_value(AdCase c, double alpha) {
  auto is = [alpha](double a) { return std::abs(alpha - a) < 1e-12; };
  switch (c) {
    case AdCase::FullySpecified:
      if (is(0.05)) return 2.492;
      if (is(0.10)) return 1.933;
      break;
    case AdCase::KnownScale:
      if (is(0.05)) return 1.321;
      if (is(0.10)) return 1.062;
      break;
  }
  throw std::invalid_argument(std::string("ad_critical_value: no entry for case ") + to_string(c) +
                              " at alpha " + std::to_string(alpha));
}

AdResult ad_decide(double statistic, AdCase c, double alpha) {
  AdResult r;
  r.statistic = statistic;
  r.ad_case = c;
  r.alpha = alpha;
  r.critical_value = ad_critical_value(c, alpha);
  r.reject = statistic > r.critical_value;
  return r;
}

const char* to_string(AdCase c) {
  return c == AdCase::FullySpecified ? "fully-specified" : "known-scale";
}

}  // namespace maxfield
