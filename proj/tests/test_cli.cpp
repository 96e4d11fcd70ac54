#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ek_cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = ek::cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(ParseMagnitude, ScientificNotation) {
  EXPECT_EQ(ek::cli::parse_magnitude("1e8"), 100'000'000u);
  EXPECT_EQ(ek::cli::parse_magnitude("2.5e3"), 2500u);
  EXPECT_EQ(ek::cli::parse_magnitude("12"), 12u);
  EXPECT_THROW(ek::cli::parse_magnitude("1.5"), ek::cli::config_error);
  EXPECT_THROW(ek::cli::parse_magnitude("-3"), ek::cli::config_error);
  EXPECT_THROW(ek::cli::parse_magnitude("1e8x"), ek::cli::config_error);
  EXPECT_EQ(ek::cli::parse_magnitude_list("1e4,1e6"), (std::vector<std::uint64_t>{10'000, 1'000'000}));
}

TEST(Cli, OmegaRowsAndSummary) {
  auto r = run({"omega", "--x", "1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "n,omega\n1,0\n");
  r = run({"omega", "--x", "10", "--summary"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_DOUBLE_EQ(j.at("mean").get<double>(), 1.1);
  EXPECT_EQ(j.at("sum").get<int>(), 11);
  r = run({"omega", "--x", "30", "--z", "3"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\n30,2\n"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run({"omega", "--x", "0"}).code, 2);
  EXPECT_EQ(run({"omega", "--x", "abc"}).code, 2);
  EXPECT_EQ(run({"omega"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"moments", "--mode", "theorem1", "--x", "1e4", "--k", "3"}).code, 2);
  EXPECT_EQ(run({"moments", "--mode", "prop2", "--x", "1e4", "--k", "2"}).code, 2);
  EXPECT_EQ(run({"distribution", "--x", "1e4", "--center", "median"}).code, 2);
  EXPECT_EQ(run({"moments", "--mode", "prop3", "--seq", "polynomial", "--x", "100"}).code, 2);
}

TEST(Cli, CapacityErrorsExitThree) {
  const auto r = run({"moments", "--mode", "prop3", "--x", "100", "--z", "1e5", "--k", "3"});
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, MomentsReports) {
  auto r = run({"moments", "--mode", "theorem1", "--x", "1e5", "--k", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j.contains("ratio"));
  EXPECT_TRUE(ek::validate(j.get<ek::MomentReport>()).empty());

  r = run({"moments", "--mode", "prop2", "--x", "1e6", "--z", "30", "--k", "4", "--strict"});
  EXPECT_EQ(r.code, 0) << r.err;

  const auto ledger = temp_file("ek_cli_ledger.csv");
  r = run({"moments", "--mode", "prop3", "--seq", "shifted_primes", "--x", "1e5", "--k", "2", "--ledger-out", ledger.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("mode"), "prop3");
  EXPECT_TRUE(j.at("details").contains("ledger_total_abs"));
  const auto csv = slurp(ledger);
  EXPECT_EQ(csv.rfind("d,A_d,r_d,r_d_exact\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 326);
  std::filesystem::remove(ledger);

  r = run({"moments", "--mode", "prop4", "--g", "chi4", "--seq", "polynomial", "--coeffs", "1,0,1", "--x", "2000", "--k", "2", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind(ek::moment_csv_header(), 0), 0u);
}

TEST(Cli, StrictFailureExitsFour) {
  const auto r = run({"moments", "--mode", "prop2", "--x", "1e5", "--z", "30", "--k", "4", "--slack", "1e-9", "--strict"});
  EXPECT_EQ(r.code, 4);
}

TEST(Cli, DistributionPlotFile) {
  const auto plot = temp_file("ek_cli_plot.dat");
  const auto r = run({"distribution", "--x", "1e5", "--center", "loglog_n", "--plot", plot.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = nlohmann::json::parse(r.out).get<ek::DistributionReport>();
  EXPECT_TRUE(ek::validate(rep).empty());
  std::ifstream in(plot);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line[0], '#');
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    double a, b, c;
    ASSERT_TRUE(ls >> a >> b >> c) << line;
    std::string extra;
    EXPECT_FALSE(ls >> extra);
    ++rows;
  }
  EXPECT_EQ(rows, static_cast<int>(rep.plot.size()));
  std::filesystem::remove(plot);
}

TEST(Cli, HistCsv) {
  const auto r = run({"hist", "--x", "10"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "k,pi_k\n0,1\n1,7\n2,2\n");
}

TEST(Cli, ModelIsByteIdentical) {
  const auto a = run({"model", "--zmax", "1000", "--samples", "1e5", "--seed", "42"});
  const auto b = run({"model", "--zmax", "1000", "--samples", "1e5", "--seed", "42", "--threads", "3"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto c = run({"model", "--zmax", "1000", "--samples", "1e5", "--seed", "43"});
  EXPECT_NE(a.out, c.out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_EQ(j.at("prime_count"), 168);
}

TEST(Cli, HrFit) {
  const auto r = run({"hrfit", "--x", "1e4,1e6", "--c1", "1.0", "--verify", "1e5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(std::isfinite(j.at("c0").get<double>()));
  EXPECT_TRUE(j.at("verify").at("holds").get<bool>());
}

TEST(Cli, ConfigFileFlagsTakePrecedence) {
  const auto cfg = temp_file("ek_cli_config.json");
  {
    std::ofstream out(cfg);
    out << R"({"x": 100, "summary": true, "format": "csv"})";
  }
  auto r = run({"omega", "--config", cfg.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("x,sum,mean\n100,", 0), 0u);
  r = run({"omega", "--x", "10", "--config", cfg.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("x,sum,mean\n10,11,", 0), 0u);
  std::filesystem::remove(cfg);
  EXPECT_EQ(run({"omega", "--config", cfg.string()}).code, 2);
}

TEST(Cli, OutFileAndThreadIndependence) {
  const auto path = temp_file("ek_cli_out.json");
  ASSERT_EQ(run({"--out", path.string(), "distribution", "--x", "2e5"}).code, 0);
  const auto one = slurp(path);
  ASSERT_EQ(run({"--out", path.string(), "--threads", "4", "--segment-width", "5000", "distribution", "--x", "2e5"}).code, 0);
  EXPECT_EQ(one, slurp(path));
  std::filesystem::remove(path);
}

TEST(Cli, PrimeCacheIsOptional) {
  const auto cache = temp_file("ek_cli_primes.bin");
  std::filesystem::remove(cache);
  const auto a = run({"--prime-cache", cache.string(), "model", "--zmax", "500", "--samples", "1000"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_TRUE(std::filesystem::exists(cache));
  const auto b = run({"--prime-cache", cache.string(), "model", "--zmax", "500", "--samples", "1000"});
  const auto c = run({"model", "--zmax", "500", "--samples", "1000"});
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  std::filesystem::remove(cache);
}

}  // namespace
