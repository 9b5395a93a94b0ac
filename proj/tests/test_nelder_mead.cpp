#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "maxfield/nelder_mead.hpp"

using namespace maxfield;

TEST(NelderMead, FindsInteriorMinimum) {
  auto f = [](const std::vector<double>& x) {
    return (x[0] - 0.3) * (x[0] - 0.3) + 2.0 * (x[1] - 0.7) * (x[1] - 0.7) + 0.5 * (x[0] - 0.3) * (x[1] - 0.7);
  };
  const auto r = nelder_mead_box(f, {0.9, 0.1}, {0.15, 1e-6, 1000});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 0.3, 1e-4);
  EXPECT_NEAR(r.x[1], 0.7, 1e-4);
}

TEST(NelderMead, StaysInTheBox) {
  std::size_t outside = 0;
  auto f = [&](const std::vector<double>& x) {
    for (double v : x) outside += v < 0.0 || v > 1.0;
    return -x[0] + x[1];
  };
  const auto r = nelder_mead_box(f, {0.5, 0.5}, {0.15, 1e-6, 2000});
  EXPECT_EQ(outside, 0u);
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], 0.0, 1e-4);
}

TEST(NelderMead, InfeasibleRegionIsAvoided) {
  auto f = [](const std::vector<double>& x) {
    if (x[0] > 0.6) return std::numeric_limits<double>::infinity();
    if (x[0] < 0.05) return std::numeric_limits<double>::quiet_NaN();
    return (x[0] - 0.5) * (x[0] - 0.5);
  };
  const auto r = nelder_mead_box(f, {0.2}, {0.15, 1e-7, 500});
  EXPECT_NEAR(r.x[0], 0.5, 1e-4);
}

TEST(NelderMead, BudgetExhaustionIsReported) {
  std::size_t seen = 0;
  auto f = [](const std::vector<double>& x) { return std::sin(30.0 * x[0]) + std::cos(17.0 * x[1]); };
  const auto r = nelder_mead_box(f, {0.5, 0.5}, {0.15, 1e-12, 10}, [&](const std::vector<double>&, double) { ++seen; });
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.evaluations, 10u);
  EXPECT_EQ(seen, r.evaluations);
  EXPECT_THROW(nelder_mead_box(f, {0.5, 0.5}, {0.15, 1e-3, 2}), std::invalid_argument);
  EXPECT_THROW(nelder_mead_box(f, {}, {}), std::invalid_argument);
}

TEST(Halton, KnownPoints) {
  EXPECT_EQ(halton_point(1, 2), (std::vector<double>{0.5, 1.0 / 3.0}));
  const auto p = halton_point(2, 2);
  EXPECT_DOUBLE_EQ(p[0], 0.25);
  EXPECT_DOUBLE_EQ(p[1], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(halton_point(3, 1)[0], 0.75);
}
