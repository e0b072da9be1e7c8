#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "convfold/cli.hpp"

using namespace convfold;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
  json report() const { return json::parse(out); }
};

Run invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("convfold_cli_" + name)).string();
}

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = temp_path(name);
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(CliUsage, MissingOrUnknownSubcommandIsUsageError) {
  for (const auto& args : std::vector<std::vector<std::string>>{{}, {"frobnicate"}, {"verify-lemma"},
                                                                 {"verify-lemma", "tiling"}}) {
    const auto r = invoke(args);
    EXPECT_EQ(r.code, cli::kUsage);
    EXPECT_TRUE(r.out.empty());
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
  }
}

TEST(CliUsage, BadFlagsAndValuesAreUsageErrors) {
  EXPECT_EQ(invoke({"solve", "--bogus", "1"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"solve", "--p", "two"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"solve", "--domain", "no-such-domain"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"solve", "--reaction", "exotic"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"solve", "--reaction", "power", "--p", "2", "--q", "3"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"solve", "--p", "0.5"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"appendix", "--alpha", "-1"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"solve", "--config", temp_path("missing.toml")}).code, cli::kUsage);
}

TEST(CliUsage, HelpExitsCleanly) {
  const auto r = invoke({"solve", "--help"});
  EXPECT_EQ(r.code, cli::kPass);
  EXPECT_NE(r.err.find("--reaction"), std::string::npos);
}

TEST(CliConfig, UnknownKeysAreRejected) {
  const auto cfg = write_temp("unknown.toml", "domain = square\nmesh_size = 0.1\n");
  EXPECT_EQ(invoke({"solve", "--config", cfg}).code, cli::kUsage);
  std::filesystem::remove(cfg);
}

TEST(CliConfig, FlagsOverrideFileEntries) {
  const auto cfg = write_temp("heart.toml", "domain = pentagon\nn-directions = 90\nseed = 11\n");
  const auto r = invoke({"heart", "--config", cfg, "--domain", "square"});
  ASSERT_EQ(r.code, cli::kPass) << r.err;
  const auto j = r.report();
  EXPECT_EQ(j["config"]["domain"], "square");
  EXPECT_EQ(j["config"]["n_directions"], "90");
  EXPECT_EQ(j["seed"], 11);
  EXPECT_EQ(j["heart"]["directions_used"], 90);
  std::filesystem::remove(cfg);
}

TEST(CliConfig, ListFlagsAcceptCommas) {
  const auto r = invoke({"appendix", "--n-directions", "200", "--n-points", "11", "--sequence-n", "10,2"});
  ASSERT_EQ(r.code, cli::kPass) << r.err;
  const auto seq = r.report()["sequence"];
  ASSERT_EQ(seq.size(), 2u);
  EXPECT_EQ(seq[0]["n"], 2);
  EXPECT_EQ(seq[1]["n"], 10);
}

TEST(CliExit, PassingAndFailingChecks) {
  const auto ok = invoke({"verify-lemma", "fold", "--corpus", "random", "--count", "100", "--seed", "7"});
  EXPECT_EQ(ok.code, cli::kPass);
  EXPECT_EQ(ok.report()["failures"], 0);
  EXPECT_EQ(ok.report()["polygons"], 100);

  const auto bad = invoke({"check-hypotheses", "--reaction", "power", "--p", "2", "--q", "3"});
  EXPECT_EQ(bad.code, cli::kFail);
  EXPECT_FALSE(bad.report()["passed"]);
  EXPECT_FALSE(bad.report()["hypotheses"]["ratio_nonincreasing"]["holds"]);
}

TEST(CliExit, SweepWithEmptyDomainListIsUsageError) {
  const auto cfg = write_temp("sweep.toml", "domains = []\n");
  EXPECT_EQ(invoke({"sweep", "--config", cfg}).code, cli::kUsage);
  std::filesystem::remove(cfg);
}

TEST(CliExit, SweepRecordsPerCellErrors) {
  const auto r = invoke({"sweep", "--domains", "square,nowhere", "--p", "2", "--h", "0.02", "--n-segments", "500"});
  EXPECT_EQ(r.code, cli::kFail);
  const auto j = r.report();
  ASSERT_EQ(j["cells"].size(), 2u);
  EXPECT_TRUE(j["cells"][0]["passed"]);
  EXPECT_EQ(j["cells"][0]["critical_points"]["count"], 1);
  EXPECT_FALSE(j["cells"][1]["passed"]);
  EXPECT_EQ(j["cells"][1]["error"]["kind"], "InvalidConfig");
  EXPECT_EQ(j["failed_cells"], 1);
}

TEST(CliSolve, SquareTorsionMatchesSeriesValue) {
  const auto r = invoke({"solve", "--domain", "square", "--p", "2", "--reaction", "torsion", "--h", "0.01"});
  ASSERT_EQ(r.code, cli::kPass) << r.err;
  // Sine-series value of the square torsion maximum.
  EXPECT_NEAR(r.report()["max_u"].get<double>(), 0.0736713, 0.0736713 * 2e-3);
  EXPECT_TRUE(r.report()["diagnostics"]["converged"]);
}

TEST(CliSolve, WritesFieldDumpsAndFigure) {
  const auto csv = temp_path("u.csv"), grid = temp_path("u.bin"), svg = temp_path("u.svg"),
             out = temp_path("report.json");
  const auto r = invoke({"solve", "--domain", "disk", "--h", "0.1", "--csv", csv, "--grid", grid, "--grid-n", "16",
                         "--svg", svg, "--out", out});
  ASSERT_EQ(r.code, cli::kPass) << r.err;
  EXPECT_TRUE(r.out.empty());
  const auto j = json::parse(slurp(out));
  EXPECT_FALSE(j["config"].contains("csv"));
  EXPECT_FALSE(j["config"].contains("out"));
  const auto g = read_grid_binary(grid);
  EXPECT_EQ(g.nx, 16u);
  EXPECT_EQ(slurp(csv).rfind("x,y,u\n", 0), 0u);
  const auto figure = slurp(svg);
  EXPECT_GT(std::count(figure.begin(), figure.end(), '\n'), 8);
  for (const auto& p : {csv, grid, svg, out}) std::filesystem::remove(p);
}

TEST(CliAppendix, FoldingHeightBoundAtSmallAlpha) {
  const auto obj = temp_path("k.obj");
  const auto r = invoke({"appendix", "--alpha", "0.02", "--n-directions", "5000", "--obj", obj});
  ASSERT_EQ(r.code, cli::kPass) << r.err;
  const auto j = r.report();
  EXPECT_LE(j["folding_bound"]["max_height"].get<double>(), 0.04 + 1e-6);
  EXPECT_NE(slurp(obj).find("\nf "), std::string::npos);
  std::filesystem::remove(obj);
}

TEST(CliFigures, FoldHeartAndReflectionEmitSvg) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"fold", "--domain", "pentagon"},
           {"heart", "--domain", "square", "--n-directions", "120"},
           {"reflect-experiment", "--domain", "rectangle3", "--h", "0.05"},
           {"check-concavity", "--domain", "disk", "--h", "0.05", "--n-segments", "500"}}) {
    const auto svg = temp_path("fig.svg");
    auto a = args;
    a.insert(a.end(), {"--svg", svg});
    const auto r = invoke(a);
    EXPECT_EQ(r.code, cli::kPass) << args[0] << r.err;
    EXPECT_NE(slurp(svg).find("<polygon"), std::string::npos) << args[0];
    std::filesystem::remove(svg);
  }
}

TEST(CliPicone, ProportionalPairsAreEqualities) {
  const auto r = invoke({"picone", "--domain", "pentagon", "--h", "0.05", "--p", "3"});
  ASSERT_EQ(r.code, cli::kPass) << r.err;
  for (const auto& pair : r.report()["pairs"]) {
    EXPECT_GE(pair["min_relative_slack"].get<double>(), -1e-9);
    if (pair["proportional"]) EXPECT_TRUE(pair["equality"]);
  }
}

TEST(CliDeterminism, RepeatedRunsAreByteIdentical) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"verify-lemma", "section", "--count", "200", "--seed", "3", "--jobs", "4"},
           {"check-concavity", "--domain", "random:6:5", "--h", "0.05", "--n-segments", "2000", "--seed", "9"},
           {"sweep", "--domains", "square,half-disk", "--p", "1.5,3", "--reactions", "torsion,power", "--h", "0.08",
            "--n-segments", "300", "--jobs", "3"}}) {
    const auto a = invoke(args), b = invoke(args);
    EXPECT_EQ(a.code, b.code);
    EXPECT_EQ(a.out, b.out) << args[0];
    EXPECT_FALSE(a.out.empty());
  }
}

TEST(CliReport, EveryReportCarriesCommandSeedAndConfig) {
  const auto r = invoke({"check-hypotheses", "--reaction", "torsion", "--p", "3"});
  ASSERT_EQ(r.code, cli::kPass);
  const auto j = r.report();
  EXPECT_EQ(j["command"], "check-hypotheses");
  EXPECT_EQ(j["seed"], 7);
  EXPECT_EQ(j["config"]["p"], "3");
  EXPECT_TRUE(j["passed"]);
}
