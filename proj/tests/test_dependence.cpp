#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "maxfield/dependence.hpp"

using namespace maxfield;

namespace {

double brute_force_tau(const std::vector<double>& u, const std::vector<double>& v) {
  long s = 0;
  const std::size_t n = u.size();
  auto sign = [](double x) { return (x > 0) - (x < 0); };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) s += sign(u[i] - u[j]) * sign(v[i] - v[j]);
  return static_cast<double>(s) / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

}  // namespace

TEST(Kendall, Examples) {
  const std::vector<double> u{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(kendall_tau(u, std::vector<double>{1, 3, 2, 4}).tau, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(kendall_tau(u, std::vector<double>{10, 20, 30, 40}).tau, 1.0);
  EXPECT_DOUBLE_EQ(kendall_tau(u, std::vector<double>{4, 3, 2, 1}).tau, -1.0);
  std::vector<double> e(u.size());
  std::transform(u.begin(), u.end(), e.begin(), [](double x) { return std::exp(x) - 7.0; });
  EXPECT_DOUBLE_EQ(kendall_tau(u, e).tau, 1.0);
}

TEST(Kendall, MatchesBruteForceOnRandomInputs) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + gen() % 120;
    // small integer ranges force ties in either or both margins
    const int range = trial % 3 == 0 ? 5 : 1'000'000;
    std::uniform_int_distribution<int> dist(0, range);
    std::vector<double> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = dist(gen);
      v[i] = trial % 2 ? dist(gen) : u[i] + dist(gen) % 7;
    }
    if (std::all_of(u.begin(), u.end(), [&](double x) { return x == u[0]; })) continue;
    if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; })) continue;
    ASSERT_NEAR(kendall_tau(u, v).tau, brute_force_tau(u, v), 1e-14) << "trial " << trial;
  }
}

TEST(Kendall, Guards) {
  EXPECT_THROW(kendall_tau(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), std::invalid_argument);
  EXPECT_THROW(kendall_tau(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
  EXPECT_THROW(kendall_tau(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST(Kendall, VarianceFormula) {
  EXPECT_NEAR(tau_variance(10), 50.0 / 810.0, 1e-15);
  EXPECT_NEAR(tau_variance(2), 1.0, 1e-15);
  EXPECT_NEAR(tau_variance(10'000), 4.44e-5, 1e-7);
  EXPECT_EQ(kendall_tau(std::vector<double>{1, 2, 3}, std::vector<double>{3, 1, 2}).variance, tau_variance(3));
}

TEST(Kendall, VarianceMatchesPermutationNull) {
  std::mt19937_64 gen(5);
  std::vector<double> u(10), v(10);
  std::iota(u.begin(), u.end(), 0.0);
  v = u;
  const int reps = 100'000;
  double ss = 0.0;
  for (int r = 0; r < reps; ++r) {
    std::shuffle(v.begin(), v.end(), gen);
    const double t = kendall_tau(u, v).tau;
    ss += t * t;
  }
  EXPECT_NEAR(ss / reps / tau_variance(10), 1.0, 0.02);
}

TEST(Kendall, IndependentInputsNearZero) {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> z;
  std::vector<double> u(10'000), v(10'000);
  for (auto& x : u) x = z(gen);
  for (auto& x : v) x = z(gen);
  const auto t = kendall_tau(u, v);
  EXPECT_LT(std::abs(t.tau), 3.0 * std::sqrt(t.variance));
}

TEST(Pairs, Enumeration) {
  const auto all = all_pairs(4);
  EXPECT_EQ(all.size(), 6u);
  EXPECT_EQ(all.front(), (SitePair{0, 1}));
  EXPECT_EQ(all.back(), (SitePair{2, 3}));
  const auto ref = reference_pairs(4, 2);
  ASSERT_EQ(ref.size(), 3u);
  EXPECT_EQ(ref[0], (SitePair{2, 0}));
  EXPECT_EQ(ref[0].id(), "2-0");
}

TEST(TauCurve, DuplicateSiteGivesOne) {
  ModelConfig m;
  m.link = {2.0, -0.5};
  const SiteSet sites = SiteSet::on_line(std::vector<double>{0.0, 0.0, 1.5});
  const auto sim = make_simulator(sites, m);
  const auto sample = simulate_sample(*sim, 1, 400, 3);
  const auto curve = tau_curve(sample, sites, all_pairs(3));
  ASSERT_EQ(curve.size(), 3u);
  EXPECT_EQ(curve[0].h, 0.0);
  EXPECT_NEAR(curve[0].estimate.tau, 1.0, 1e-12);
  EXPECT_LT(curve[1].estimate.tau, 1.0);
  const auto csv = tau_curve_to_csv(curve);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "h,k,tau,var,n,pair");
}

TEST(TauCurve, ComonotoneLimit) {
  ModelConfig m;
  m.variance = 1e-24;
  const SiteSet sites = SiteSet::on_line(std::vector<double>{0.0, 1.0, 4.0});
  const auto sample = simulate_sample(*make_simulator(sites, m), 1, 300, 2);
  for (const auto& e : tau_curve(sample, sites, all_pairs(3))) EXPECT_NEAR(e.estimate.tau, 1.0, 1e-12);
}

TEST(TauCurve, ThreadCountDoesNotMatter) {
  ModelConfig m;
  m.link = {2.0, 0.5};
  const SiteSet sites = SiteSet::on_line(std::vector<double>{0.0, 0.5, 1.0, 2.0});
  const auto sample = simulate_sample(*make_simulator(sites, m), 1, 500, 9);
  EXPECT_EQ(tau_curve_to_csv(tau_curve(sample, sites, all_pairs(4), 1)),
            tau_curve_to_csv(tau_curve(sample, sites, all_pairs(4), 3)));
}

TEST(TauCurve, MaxStableCaseIsInvariantUnderBlockSize) {
  ModelConfig m;
  m.link = {2.0, 0.0};
  const SiteSet sites = SiteSet::on_line(std::vector<double>{0.0, 0.5, 1.0, 2.0});
  const auto sim = make_simulator(sites, m);
  const auto s1 = simulate_sample(*sim, 1, 4000, 1);
  const auto s8 = simulate_sample(*sim, 8, 4000, 2);
  const auto pairs = reference_pairs(4);
  const auto c1 = tau_curve(s1, sites, pairs);
  const auto c8 = tau_curve(s8, sites, pairs);
  for (std::size_t i = 0; i < c1.size(); ++i) {
    const double se = std::sqrt(c1[i].estimate.variance + c8[i].estimate.variance);
    EXPECT_NEAR(c1[i].estimate.tau, c8[i].estimate.tau, 3.0 * se) << "h=" << c1[i].h;
  }
}

TEST(TauInterpolator, KnotsAndMidpoints) {
  const TauInterpolator f({{1.0, 0.6}, {2.0, 0.4}, {4.0, 0.1}});
  EXPECT_EQ(f(1.0), 0.6);
  EXPECT_EQ(f(2.0), 0.4);
  EXPECT_NEAR(f(1.5), 0.5, 1e-15);
  EXPECT_NEAR(f(3.0), 0.25, 1e-15);
  EXPECT_EQ(f(0.0), 0.6);
  EXPECT_EQ(f(9.0), 0.1);
  const TauInterpolator one({{2.0, 0.3}});
  EXPECT_EQ(one(0.5), 0.3);
  EXPECT_THROW(TauInterpolator({}), std::invalid_argument);
  EXPECT_THROW(TauInterpolator({{1.0, 0.5}, {1.0, 0.4}}), std::invalid_argument);
}
