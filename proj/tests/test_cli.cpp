#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cascades/error.hpp"
#include "cli.hpp"

using namespace cascades;
using namespace cascades::cli;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "cascade-sim");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream cl(line);
    std::string cell;
    while (std::getline(cl, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::path(::testing::TempDir()) / ("cascade_cli_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Constants, TwoOne) {
  const Result r = invoke({"constants", "--a", "2", "--b", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["kappa_star"].get<double>(), 11.6183, 1e-3);
  EXPECT_NEAR(j["lambda_star"].get<double>(), 0.52877, 1e-4);
  EXPECT_LE(j["identity_residual"].get<double>(), 1e-10);
}

TEST(Constants, EqualWeightsRejected) {
  EXPECT_EQ(invoke({"constants", "--a", "1", "--b", "1"}).code, 2);
  EXPECT_EQ(invoke({"constants", "--a", "2"}).code, 2);
  EXPECT_EQ(invoke({}).code, 2);
}

TEST(Run, ZeroScheduleThirdRow) {
  const Result r = invoke({"run", "--schedule", "zero", "--t-max", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].size(), 10u);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), kExactCsvHeader);
  EXPECT_EQ(rows[3][0], "3");
  EXPECT_NEAR(std::stod(rows[3][3]), 7.0 / 27.0, 1e-15);
}

TEST(Run, OracleMatchesExact) {
  const std::vector<std::string> base{"run", "--a", "3", "--b", "2", "--t-max", "16"};
  auto exact_args = base;
  auto oracle_args = base;
  oracle_args.insert(oracle_args.end(), {"--mode", "oracle"});
  const auto exact = csv_rows(invoke(exact_args).out);
  const auto oracle = csv_rows(invoke(oracle_args).out);
  ASSERT_EQ(exact.size(), 17u);
  ASSERT_EQ(oracle.size(), 17u);
  for (std::size_t i = 1; i < exact.size(); ++i) {
    for (std::size_t c = 1; c <= 7; ++c) {
      EXPECT_NEAR(std::stod(exact[i][c]), std::stod(oracle[i][c]), 1e-12) << i << "," << c;
    }
  }
}

TEST(Run, MonteCarloNeedsSeedAndFloat) {
  EXPECT_EQ(invoke({"run", "--mode", "mc", "--t-max", "5"}).code, 2);
  EXPECT_EQ(invoke({"run", "--mode", "mc", "--seed", "1", "--rational"}).code, 2);
  EXPECT_EQ(invoke({"run", "--mode", "bogus"}).code, 2);
  EXPECT_EQ(invoke({"run", "--schedule", "power:c=1"}).code, 2);
}

TEST(Run, MonteCarloWorkerCountInvariant) {
  const std::vector<std::string> base{"run", "--mode", "mc", "--seed", "2024", "--trials", "3000",
                                      "--t-max", "40"};
  auto one = base;
  one.insert(one.end(), {"--workers", "1"});
  auto eight = base;
  eight.insert(eight.end(), {"--workers", "8"});
  const Result a = invoke(one);
  const Result b = invoke(eight);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')), kMonteCarloCsvHeader);
}

TEST(Run, ResourceLimitExit) {
  const Result r = invoke({"run", "--t-max", "80", "--max-states", "8"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("ResourceLimit"), std::string::npos);
}

TEST(Run, SummaryAndConfigRoundTrip) {
  const auto dir = scratch("summary");
  const std::string csv = (dir / "a.csv").string();
  const std::string summary = (dir / "a.json").string();
  const Result r = invoke({"run", "--a", "3", "--b", "1", "--schedule", "const:p=0.2", "--t-max",
                           "60", "--out", csv, "--summary", summary});
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = json::parse(slurp(summary));
  EXPECT_EQ(s["config"]["a"], 3.0);
  EXPECT_FALSE(s["rate_fit"].is_null());
  EXPECT_GT(s["runtime_seconds"].get<double>(), 0.0);
  EXPECT_GE(s["states"]["peak"].get<std::size_t>(), 1u);

  // Replaying the summary reproduces the CSV.
  const std::string csv2 = (dir / "b.csv").string();
  ASSERT_EQ(invoke({"run", "--config", summary, "--out", csv2}).code, 0);
  EXPECT_EQ(slurp(csv), slurp(csv2));

  RunConfig c;
  c.a = 5;
  c.seed = 77;
  c.mode = RunMode::MonteCarlo;
  c.schedule = "power:c=2,alpha=1.5";
  const RunConfig back = config_from_json(json::parse(to_json(c).dump()));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_THROW(config_from_json(json::parse(R"({"a": "two"})")), Error);
}

TEST(Verify, SmallGridPasses) {
  const Result r = invoke({"verify", "--ratios", "2,3", "--lambdas", "0,1", "--ps", "0,0.5,1",
                           "--horizon", "24"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(json::parse(r.out)["passed"].get<bool>());
}

TEST(Verify, EmptyGridIsUsageError) {
  EXPECT_EQ(invoke({"verify", "--ratios", ""}).code, 2);
  EXPECT_EQ(invoke({"verify", "--ps", ","}).code, 2);
}

TEST(Verify, WrongKappaFormulaIsCaught) {
  VerifyGrids g;
  g.ratios = {2.0, 5.0};
  g.horizon = 16;
  // drops the -1 inside the log term
  g.kappa = [](const UrnParams& p) {
    const double r = p.ratio();
    const double gr = (r - 1) / std::log(r);
    return 1.0 / (1.0 + gr * std::log(gr));
  };
  std::ostringstream out, err;
  EXPECT_EQ(cmd_verify(g, out, err), 1);
  EXPECT_NE(err.str().find("kappa_lambda_identity"), std::string::npos);
}

TEST(Sweep, AlphaSeriesAndAggregate) {
  const auto dir = scratch("sweep");
  const Result r = invoke({"sweep", "--schedule", "power:c=1,alpha=1", "--t-max", "1000",
                           "--param", "alpha", "--values", "1,2",
                           "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json agg = json::parse(slurp(dir / "sweep.json"));
  ASSERT_EQ(agg["results"].size(), 2u);
  for (const auto& item : agg["results"]) {
    EXPECT_TRUE(std::filesystem::exists(item["csv"].get<std::string>()));
    EXPECT_GT(item["NE_t_max"].get<double>(), 0.0);
  }
  EXPECT_EQ(agg["results"][1]["config"]["schedule"], "power:c=1,alpha=2");

  // Summable revealers (alpha = 2) leave E_t flat; alpha = 1 keeps learning.
  auto error_at = [&](const std::string& csv, std::size_t t) {
    return std::stod(csv_rows(slurp(csv))[t][3]);
  };
  const std::string a1 = agg["results"][0]["csv"];
  const std::string a2 = agg["results"][1]["csv"];
  EXPECT_GE(error_at(a2, 1000), 0.9 * error_at(a2, 100));
  EXPECT_LT(error_at(a1, 1000), 0.9 * error_at(a1, 100));
}

TEST(Sweep, PartialFailureKeepsResults) {
  const auto dir = scratch("partial");
  const Result r = invoke({"sweep", "--t-max", "20", "--param", "a_over_b", "--values", "2,1",
                           "--out-dir", dir.string()});
  EXPECT_EQ(r.code, 2);
  const json agg = json::parse(slurp(dir / "sweep.json"));
  EXPECT_EQ(agg["results"][0]["exit_code"], 0);
  EXPECT_EQ(agg["results"][1]["exit_code"], 2);
}

TEST(Sweep, EmptyValuesIsUsageError) {
  const auto dir = scratch("empty");
  EXPECT_EQ(invoke({"sweep", "--param", "epsilon", "--values", "", "--out-dir", dir.string()}).code, 2);
  EXPECT_EQ(invoke({"sweep", "--param", "bogus", "--values", "1", "--out-dir", dir.string()}).code, 2);
}
