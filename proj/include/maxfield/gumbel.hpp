#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace maxfield {

/// G(x) = exp(-exp(-(x - location) / scale)).
struct GumbelParams {
  double location = 0.0;
  double scale = 1.0;

  /// Throws std::invalid_argument unless scale > 0 and both are finite.
  void validate() const;
};

double gumbel_cdf(double x, const GumbelParams& p);
double gumbel_quantile(double u, const GumbelParams& p);

struct LocationFit {
  double location = 0.0;
  double standard_error = 0.0;
};

/// Maximum-likelihood location with the scale held fixed:
///   a = -b log((1/n) sum exp(-x_i / b)).
/// The standard error b / sqrt(n) is the inverse square root of the
/// observed Fisher information at the estimate.
LocationFit fit_location_known_scale(std::span<const double> sample, double scale);

struct GumbelFit {
  GumbelParams params;
  double se_location = 0.0;
  double se_scale = 0.0;
  int iterations = 0;
};

/// Root finding gave up; carries the last scale iterate.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_scale)
      : std::runtime_error(what), last_scale_(last_scale) {}
  double last_scale() const { return last_scale_; }

 private:
  double last_scale_;
};

/// Two-parameter maximum-likelihood fit. The scale solves the profile
/// equation b = mean(x) - sum(x w) / sum(w), w = exp(-x / b); the location
/// follows in closed form. Standard errors from the expected Fisher
/// information. Requires n >= 10.
GumbelFit fit_gumbel_ml(std::span<const double> sample, int max_iterations = 200);

/// Anderson-Darling A^2 of a sample against a continuous cdf. The cdf
/// transforms are clamped to [1e-12, 1 - 1e-12]. Requires n >= 8 and a
/// sample that is not constant.
double anderson_darling(std::span<const double> sample, const std::function<double(double)>& cdf);

enum class AdCase { FullySpecified, KnownScale };

struct AdResult {
  double statistic = 0.0;
  AdCase ad_case = AdCase::FullySpecified;
  double alpha = 0.05;
  double critical_value = 0.0;
  bool reject = false;
};

/// Upper critical values of A^2. FullySpecified is the standard case-0 EDF
/// table; KnownScale is the Gumbel case with estimated location and known
/// scale. Alphas 0.05 and 0.10 only.
double ad_critical_value(AdCase c, double alpha);
AdResult ad_decide(double statistic, AdCase c, double alpha);

const char* to_string(AdCase c);

}  // namespace maxfield
