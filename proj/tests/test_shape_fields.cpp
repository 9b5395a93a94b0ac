#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "maxfield/shape_fields.hpp"

using namespace maxfield;

namespace {

constexpr ShapeFamily kFamilies[] = {ShapeFamily::Gauss, ShapeFamily::Laplace, ShapeFamily::Uniform};

// Integral of g over the family support, split at the kink / edges.
template <class F>
double integrate(ShapeFamily family, double s, F g) {
  using boost::math::quadrature::gauss_kronrod;
  const double w = support_half_width(family, s);
  const double lo = std::isfinite(w) ? -w : -60.0 * s;
  const double hi = std::isfinite(w) ? w : 60.0 * s;
  return gauss_kronrod<double, 61>::integrate(g, lo, 0.0, 20, 1e-14) +
         gauss_kronrod<double, 61>::integrate(g, 0.0, hi, 20, 1e-14);
}

}  // namespace

TEST(ScaleLink, Examples) {
  EXPECT_EQ(scale_from_magnitude(7.3, MagnitudeLink{2.0, 0.0}), 1.0);
  EXPECT_EQ(scale_from_magnitude(2.0, MagnitudeLink{2.0, -0.3}), 1.0);
  EXPECT_NEAR(scale_from_magnitude(0.0, MagnitudeLink{2.0, -0.3}), 1.82212, 1e-5);
}

TEST(LogDensity, Examples) {
  EXPECT_NEAR(log_density(ShapeFamily::Gauss, 0.0, 1.0), -0.918939, 1e-6);
  EXPECT_EQ(log_density(ShapeFamily::Uniform, 2.0, 1.0), -std::numeric_limits<double>::infinity());
  EXPECT_NEAR(log_density(ShapeFamily::Laplace, 0.0, 1.0), -std::log(std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(peak_log_density(ShapeFamily::Gauss, 1.0), -0.918939, 1e-6);
  EXPECT_NEAR(peak_log_density(ShapeFamily::Uniform, 1.0), -1.24245, 1e-5);
  EXPECT_THROW(log_density(ShapeFamily::Gauss, 0.0, 0.0), std::invalid_argument);
}

TEST(LogDensity, PeakDecreasesWithScale) {
  for (auto f : kFamilies) {
    double prev = std::numeric_limits<double>::infinity();
    for (double s = 0.1; s < 20.0; s *= 1.3) {
      const double p = peak_log_density(f, s);
      EXPECT_LT(p, prev);
      EXPECT_NEAR(p, log_density(f, 0.0, s), 1e-12);
      prev = p;
    }
  }
}

TEST(LogDensity, NormalizedWithVarianceSquaredScale) {
  for (auto f : kFamilies) {
    for (double s : {0.4, 1.0, 2.7}) {
      const double mass = integrate(f, s, [&](double x) { return std::exp(log_density(f, x, s)); });
      const double var = integrate(f, s, [&](double x) { return x * x * std::exp(log_density(f, x, s)); });
      EXPECT_NEAR(mass, 1.0, 1e-8) << to_string(f) << " s=" << s;
      EXPECT_NEAR(var, s * s, 1e-6) << to_string(f) << " s=" << s;
    }
  }
}

TEST(ShapeFamily, ParseAndPrint) {
  EXPECT_EQ(parse_family("GAUSS"), ShapeFamily::Gauss);
  EXPECT_EQ(parse_family("normal"), ShapeFamily::Gauss);
  EXPECT_EQ(parse_family("laplace"), ShapeFamily::Laplace);
  EXPECT_EQ(parse_family("Uniform"), ShapeFamily::Uniform);
  EXPECT_THROW(parse_family("cauchy"), std::invalid_argument);
  for (auto f : kFamilies) EXPECT_EQ(parse_family(to_string(f)), f);
}
