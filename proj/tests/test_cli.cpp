#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cli.hpp"
#include "maxfield/io.hpp"

namespace fs = std::filesystem;
using maxfield::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("maxfield_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

struct TauRow {
  double h, tau, var;
  int k;
};

std::vector<TauRow> read_tau_csv(const std::string& path) {
  const auto table = maxfield::read_csv(path);
  std::vector<TauRow> rows;
  for (const auto& r : table.rows) {
    rows.push_back({maxfield::parse_double(r.fields[0], r.line, 0), maxfield::parse_double(r.fields[2], r.line, 2),
                    maxfield::parse_double(r.fields[3], r.line, 3),
                    static_cast<int>(maxfield::parse_integer(r.fields[1], r.line, 1))});
  }
  return rows;
}

}  // namespace

TEST_F(CliTest, SimulateIsByteReproducible) {
  const std::vector<std::string> base{"simulate", "--line", "0,2,3", "-c", "2", "-d", "-0.5", "--n", "100", "--seed", "1"};
  auto a = base;
  a.insert(a.end(), {"--out", path("a"), "--threads", "1"});
  auto b = base;
  b.insert(b.end(), {"--out", path("b"), "--threads", "3"});
  ASSERT_EQ(call(a).code, 0);
  ASSERT_EQ(call(b).code, 0);
  const auto csv = slurp(path("a/sample_k1.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 101);
  EXPECT_EQ(csv, slurp(path("b/sample_k1.csv")));
  EXPECT_EQ(slurp(path("a/sample.json")), slurp(path("b/sample.json")));
  ASSERT_EQ(call(a).code, 0);
  EXPECT_EQ(csv, slurp(path("a/sample_k1.csv")));
}

TEST_F(CliTest, SimulateFansOutOverBlockSizes) {
  ASSERT_EQ(call({"simulate", "--line", "0,1,2", "--k", "1,8,64", "--n", "20", "--out", path("o")}).code, 0);
  for (int k : {1, 8, 64}) EXPECT_TRUE(fs::exists(path("o/sample_k" + std::to_string(k) + ".csv")));
  const auto meta = nlohmann::json::parse(slurp(path("o/sample.json")));
  EXPECT_EQ(meta["samples"].size(), 3u);
  EXPECT_EQ(meta["options"]["epsilon"], 1e-6);
}

TEST_F(CliTest, ShapeConstructionWithoutCeilingIsRefused) {
  const auto r = call({"simulate", "--construction", "theorem3", "-d", "0.3", "--line", "0,1,2", "--out", path("o")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("ceiling"), std::string::npos);
  const auto ok = call({"simulate", "--construction", "theorem3", "-d", "0.3", "--ceiling", "3", "--line", "0,1,2",
                        "--n", "10", "--out", path("o")});
  EXPECT_EQ(ok.code, 0);
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(call({"simulate", "--bogus"}).code, 2);
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"simulate", "--construction", "theorem9", "--out", path("o")}).code, 2);
  EXPECT_EQ(call({"simulate", "--sites", path("missing.csv"), "--out", path("o")}).code, 2);
  EXPECT_EQ(call({"simulate", "--k", "0", "--out", path("o")}).code, 2);
  EXPECT_EQ(call({"simulate", "--variance", "-1", "--out", path("o")}).code, 2);
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  {
    std::ofstream f(path("run.ini"));
    f << "[simulate]\nn=7\nline=0,1,2\nseed=3\n";
  }
  ASSERT_EQ(call({"--config", path("run.ini"), "simulate", "--out", path("o")}).code, 0);
  auto csv = slurp(path("o/sample_k1.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 8);
  ASSERT_EQ(call({"--config", path("run.ini"), "simulate", "--n", "4", "--out", path("o")}).code, 0);
  csv = slurp(path("o/sample_k1.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST_F(CliTest, TauCurveMaxStableInvariance) {
  ASSERT_EQ(call({"tau-curve", "--line", "0,3,4", "-d", "0", "--k", "1,8", "--n", "3000", "--out", path("o")}).code, 0);
  const auto rows = read_tau_csv(path("o/tau_curve.csv"));
  std::map<double, std::vector<TauRow>> by_h;
  for (const auto& r : rows) by_h[r.h].push_back(r);
  ASSERT_EQ(by_h.size(), 3u);
  for (const auto& [h, v] : by_h) {
    ASSERT_EQ(v.size(), 2u);
    EXPECT_NEAR(v[0].tau, v[1].tau, 3.0 * std::sqrt(v[0].var + v[1].var)) << "h=" << h;
  }
}

TEST_F(CliTest, TauCurveDecreasesWithDistance) {
  ASSERT_EQ(call({"tau-curve", "--line", "0,4,5", "-c", "2", "-d", "-0.5", "--k", "1,8,64", "--n", "3000", "--out",
                  path("o")})
                .code,
            0);
  const auto rows = read_tau_csv(path("o/tau_curve.csv"));
  std::map<int, std::vector<TauRow>> by_k;
  for (const auto& r : rows) by_k[r.k].push_back(r);
  ASSERT_EQ(by_k.size(), 3u);
  for (auto& [k, v] : by_k) {
    std::sort(v.begin(), v.end(), [](const TauRow& a, const TauRow& b) { return a.h < b.h; });
    // Adjacent distances near the dependence plateau differ by less than the noise.
    for (std::size_t i = 1; i < v.size(); ++i) {
      EXPECT_LT(v[i].tau, v[i - 1].tau + 2.0 * std::sqrt(v[i].var + v[i - 1].var)) << "k=" << k << " h=" << v[i].h;
    }
    // With d < 0 the range shrinks with k; at k = 64 the curve is already flat.
    if (k < 64) {
      EXPECT_GT(v.front().tau - v.back().tau, 3.0 * std::sqrt(v.front().var + v.back().var)) << "k=" << k;
    }
  }
  for (const int k : {8, 64}) {
    const auto& lo = by_k[k / 8].front();
    const auto& hi = by_k[k].front();
    EXPECT_GT(lo.tau - hi.tau, 3.0 * std::sqrt(lo.var + hi.var)) << "k=" << k;
  }
}

TEST_F(CliTest, TauCurveDuplicateSite) {
  {
    std::ofstream f(path("sites.csv"));
    f << "x\n0\n0\n1\n";
  }
  ASSERT_EQ(call({"tau-curve", "--sites", path("sites.csv"), "--k", "1", "--n", "200", "--out", path("o")}).code, 0);
  const auto rows = read_tau_csv(path("o/tau_curve.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].h, 0.0);
  EXPECT_NEAR(rows[0].tau, 1.0, 1e-12);
  EXPECT_EQ(call({"tau-curve", "--line", "0,0,1", "--out", path("o")}).code, 2);
}

TEST_F(CliTest, MarginsTestRejectsSmallSamples) {
  EXPECT_EQ(call({"margins-test", "--n", "50", "--out", path("o")}).code, 2);
}

TEST_F(CliTest, MarginsTestShapeKnownScale) {
  const auto r = call({"margins-test", "--construction", "theorem3", "-c", "2", "-d", "-0.3", "--line", "0,0,1", "--n",
                       "50000", "--out", path("o")});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(slurp(path("o/margins.json")));
  EXPECT_EQ(j["case"], "known-scale");
  EXPECT_LT(j["sites"][0]["ad_statistic"].get<double>(), 1.321);
  EXPECT_NE(r.out.find("A2"), std::string::npos);
}

TEST_F(CliTest, MarginsTestBlockMaximaAgainstAnalyticLaw) {
  ASSERT_EQ(call({"margins-test", "-c", "2", "-d", "-0.5", "--line", "0,2,3", "--k", "8", "--n", "2000", "--out", path("o")})
                .code,
            0);
  const auto j = nlohmann::json::parse(slurp(path("o/margins.json")));
  EXPECT_EQ(j["case"], "fully-specified");
  EXPECT_NEAR(j["null"]["location"].get<double>(), std::log(8.0), 1e-12);
  EXPECT_LE(j["rejected_5"].get<int>(), 1);
}

TEST_F(CliTest, MarginsTestHasPowerAgainstWrongNull) {
  int rejected = 0;
  for (int seed = 1; seed <= 5; ++seed) {
    ASSERT_EQ(call({"margins-test", "--construction", "theorem3", "-c", "2", "-d", "-0.3", "--line", "0,0,1", "--n",
                    "50000", "--case", "specified", "--null-location", std::to_string(-std::log(1.3) + 0.5), "--seed",
                    std::to_string(seed), "--out", path("o")})
                  .code,
              0);
    const auto j = nlohmann::json::parse(slurp(path("o/margins.json")));
    rejected += j["sites"][0]["reject_5"].get<bool>();
  }
  EXPECT_EQ(rejected, 5);
}

TEST_F(CliTest, MarginsTestReadsSampleFile) {
  ASSERT_EQ(call({"simulate", "--line", "0,1,2", "--n", "150", "--k", "4", "--out", path("s")}).code, 0);
  ASSERT_EQ(call({"margins-test", "--sample", path("s/sample_k4.csv"), "--out", path("o")}).code, 0);
  const auto j = nlohmann::json::parse(slurp(path("o/margins.json")));
  EXPECT_EQ(j["k"], 4);
  EXPECT_EQ(j["sites"].size(), 2u);
}

TEST_F(CliTest, Table1FamiliesAgreeAtSameLink) {
  ASSERT_EQ(call({"table1", "--n", "50000", "--out", path("o")}).code, 0);
  const auto j = nlohmann::json::parse(slurp(path("o/table1.json")));
  ASSERT_EQ(j["cells"].size(), 6u);
  std::vector<std::pair<double, double>> first_column;
  for (const auto& cell : j["cells"]) {
    if (cell["c"] == 2.0) first_column.emplace_back(cell["location"].get<double>(), cell["location_se"].get<double>());
  }
  ASSERT_EQ(first_column.size(), 3u);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b) {
      const double se = std::hypot(first_column[a].second, first_column[b].second);
      EXPECT_LT(std::abs(first_column[a].first - first_column[b].first), 3.0 * se);
    }
  EXPECT_TRUE(fs::exists(path("o/table1.csv")));
}

TEST_F(CliTest, EstimateInputErrors) {
  {
    std::ofstream f(path("bad.csv"));
    f << "block_index,site,value\n0,0,1.0\n0,1,oops\n";
  }
  auto r = call({"estimate", "--obs", path("bad.csv"), "--line", "0,1,2", "--out", path("o")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
  {
    std::ofstream f(path("const.csv"));
    f << "block_index,site,value\n";
    for (int b = 0; b < 40; ++b) f << b << ",0," << b * 0.1 << "\n" << b << ",1,2.5\n";
  }
  r = call({"estimate", "--obs", path("const.csv"), "--line", "0,1,2", "--k", "1", "--out", path("o")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("site 1"), std::string::npos);
  EXPECT_EQ(call({"estimate", "--line", "0,1,2", "--out", path("o")}).code, 2);
  EXPECT_EQ(call({"estimate", "--obs", path("const.csv"), "--free", "q", "--line", "0,1,2", "--out", path("o")}).code, 2);
}

TEST_F(CliTest, EstimateWritesReportAndSignalsBudgetExhaustion) {
  ASSERT_EQ(call({"simulate", "--line", "0,2,3", "-c", "2", "-d", "-0.5", "--n", "400", "--out", path("s")}).code, 0);
  {
    const auto table = maxfield::read_csv(path("s/sample_k1.csv"));
    std::ofstream f(path("obs.csv"));
    f << "block_index,site,value\n";
    for (const auto& row : table.rows)
      for (std::size_t s = 2; s < row.fields.size(); ++s) f << row.fields[0] << ',' << s - 2 << ',' << row.fields[s] << '\n';
  }
  const std::vector<std::string> base{"estimate", "--obs", path("obs.csv"), "--line", "0,2,3", "--k", "1,2",
                                      "--n-sim", "200", "--starts", "1"};
  auto exhausted = base;
  exhausted.insert(exhausted.end(), {"--max-evals", "4", "--tol", "1e-9", "--out", path("e")});
  EXPECT_EQ(call(exhausted).code, 4);
  const auto j = nlohmann::json::parse(slurp(path("e/fit.json")));
  EXPECT_FALSE(j["converged"].get<bool>());
  EXPECT_EQ(j["trace"].size(), 4u);

  auto converged = base;
  converged.insert(converged.end(), {"--tol", "0.05", "--max-evals", "200", "--no-curvature", "--out", path("c")});
  EXPECT_EQ(call(converged).code, 0);
  EXPECT_TRUE(nlohmann::json::parse(slurp(path("c/fit.json")))["converged"].get<bool>());
}
