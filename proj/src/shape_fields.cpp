#include "maxfield/shape_fields.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace maxfield {
namespace {

void check_scale(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("shape density: s must be > 0 and finite");
}

const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

std::string_view to_string(ShapeFamily family) {
  switch (family) {
    case ShapeFamily::Gauss: return "gauss";
    case ShapeFamily::Laplace: return "laplace";
    case ShapeFamily::Uniform: return "uniform";
  }
  return "?";
}

ShapeFamily parse_family(std::string_view name) {
  std::string lower(name);
  for (char& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (lower == "gauss" || lower == "normal") return ShapeFamily::Gauss;
  if (lower == "laplace") return ShapeFamily::Laplace;
  if (lower == "uniform") return ShapeFamily::Uniform;
  throw std::invalid_argument("unknown shape family '" + std::string(name) + "'");
}

double log_density(ShapeFamily family, double x, double s) {
  check_scale(s);
  switch (family) {
    case ShapeFamily::Gauss: {
      const double z = x / s;
      return -std::log(s) - kLogSqrt2Pi - 0.5 * z * z;
    }
    case ShapeFamily::Laplace: {
      const double beta = s / std::numbers::sqrt2;
      return -std::log(2.0 * beta) - std::abs(x) / beta;
    }
    case ShapeFamily::Uniform: {
      const double w = s * std::numbers::sqrt3;
      if (std::abs(x) > w) return -std::numeric_limits<double>::infinity();
      return -std::log(2.0 * w);
    }
  }
  throw std::invalid_argument("log_density: unknown family");
}

double peak_log_density(ShapeFamily family, double s) { return log_density(family, 0.0, s); }

double support_half_width(ShapeFamily family, double s) {
  check_scale(s);
  if (family == ShapeFamily::Uniform) return s * std::numbers::sqrt3;
  return std::numeric_limits<double>::infinity();
}

}  // namespace maxfield
