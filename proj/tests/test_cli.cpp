#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "assuredx/beta.hpp"

using Json = nlohmann::json;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(ASSURE_DX_BIN) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

const std::string kVap = "--sens 25.9,2.1 --prev 29,98 --spec 21,36";

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("assure_dx_cli_" + name);
}

}  // namespace

TEST(Cli, HelpListsFlags) {
  const CliRun top = run("--help");
  EXPECT_EQ(top.code, 0);
  EXPECT_NE(top.out.find("sample-size"), std::string::npos);
  EXPECT_NE(top.out.find("case-study"), std::string::npos);
  const CliRun sub = run("sample-size --help");
  EXPECT_EQ(sub.code, 0);
  for (const char* flag : {"--config", "--seed", "--out", "--format", "--width", "--cap", "--sens"}) {
    EXPECT_NE(sub.out.find(flag), std::string::npos) << flag;
  }
}

TEST(Cli, SampleSizeJson) {
  const CliRun r = run("sample-size " + kVap);
  ASSERT_EQ(r.code, 0) << r.out;
  const Json j = Json::parse(r.out);
  ASSERT_TRUE(j["n_star"].is_number_integer());
  EXPECT_TRUE(j["found"].get<bool>());
  EXPECT_GE(j["assurance"].get<double>(), 0.8);
  EXPECT_EQ(j["cap"], 10000);
}

TEST(Cli, CapExceededExitsTwo) {
  const CliRun r = run("sample-size " + kVap + " --cap 50");
  EXPECT_EQ(r.code, 2);
  const Json j = Json::parse(r.out);
  EXPECT_TRUE(j["n_star"].is_null());
  EXPECT_FALSE(j["found"].get<bool>());
}

TEST(Cli, InvalidInputExitsOne) {
  EXPECT_EQ(run("sample-size --width 0").code, 1);
  EXPECT_EQ(run("sample-size --width 1.5").code, 1);
  EXPECT_EQ(run("sample-size --sens 1").code, 1);
  EXPECT_EQ(run("sample-size --no-such-flag").code, 1);
  EXPECT_EQ(run("conflict " + kVap).code, 1);  // no observed table
  const auto bad = temp_file("bad.json");
  std::ofstream(bad) << R"({"design": {"widht": 0.2}})";
  EXPECT_EQ(run("sample-size --config " + bad.string()).code, 1);
}

TEST(Cli, InfeasibleExitsThree) {
  EXPECT_EQ(run("sensitivity --sens 0.5,0.5 --epsilon 0.9999999999 --angles 8 --n-eval 10").code, 3);
  EXPECT_EQ(run("sensitivity --epsilon 1 --angles 8 --n-eval 10").code, 3);
}

TEST(Cli, TrivialWidth) {
  const CliRun r = run("sample-size " + kVap + " --width 0.999");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(Json::parse(r.out)["n_star"], 1);
}

TEST(Cli, CurveCsv) {
  const CliRun r = run("curve " + kVap + " --n-max 150");
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "n_t,assurance");
  int rows = 0, last_n = 0;
  double last_a = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    ASSERT_NE(comma, std::string::npos);
    const int n = std::stoi(line.substr(0, comma));
    EXPECT_EQ(n, last_n + 1);
    last_n = n;
    last_a = std::stod(line.substr(comma + 1));
    ++rows;
  }
  EXPECT_EQ(rows, 150);
  EXPECT_NEAR(last_a, 0.88, 0.01);
  EXPECT_EQ(run("curve " + kVap + " --n-max 150").out, r.out);
}

TEST(Cli, CurveJsonAndOutFile) {
  const auto path = temp_file("curve.json");
  std::filesystem::remove(path);
  const CliRun r = run("curve " + kVap + " --n-max 20 --format json --out " + path.string());
  ASSERT_EQ(r.code, 0);
  std::ifstream in(path);
  const Json j = Json::parse(in);
  EXPECT_EQ(j["points"].size(), 20u);
  EXPECT_EQ(j["n_t_max"], 20);
}

TEST(Cli, ConfigFileMatchesFlags) {
  const auto path = temp_file("vap.json");
  std::ofstream(path) << R"({"priors": {"sens": {"a": 25.9, "b": 2.1}, "prev": {"a": 29, "b": 98},
                              "spec": {"a": 21, "b": 36}},
                             "design": {"width": 0.16, "alpha": 0.05, "assurance": 0.8}})";
  const CliRun a = run("sample-size --config " + path.string());
  const CliRun b = run("sample-size " + kVap + " --width 0.16 --alpha 0.05 --assurance 0.8");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  // Flags override the file.
  const CliRun c = run("sample-size --config " + path.string() + " --width 0.2");
  const CliRun d = run("sample-size " + kVap + " --width 0.2");
  EXPECT_EQ(c.out, d.out);
  EXPECT_NE(c.out, a.out);
}

TEST(Cli, ConflictPmfMatchesLibrary) {
  const CliRun r = run("conflict " + kVap + " --observed 51,55,2,42");
  ASSERT_EQ(r.code, 0);
  const Json j = Json::parse(r.out);
  bool saw_prev = false;
  for (const auto& check : j["checks"]) {
    if (check["name"] != "prevalence") continue;
    saw_prev = true;
    EXPECT_EQ(check["n"], 150);
    EXPECT_EQ(check["observed"], 53);
    const auto series = assuredx::beta_binomial_pmf_series(150, {29, 98});
    ASSERT_EQ(check["pmf"].size(), series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
      EXPECT_NEAR(check["pmf"][i].get<double>(), series[i], 1e-12 + 1e-11 * series[i]);
    }
  }
  EXPECT_TRUE(saw_prev);
}

TEST(Cli, SeedMakesCompareReproducible) {
  const std::string args = "compare --lambdas 0.8 --rhos 0.5 --av-sizes 50 --reps 1000 --seed 3";
  const CliRun a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, CaseStudy) {
  const CliRun r = run("case-study vap");
  ASSERT_EQ(r.code, 0);
  const Json j = Json::parse(r.out);
  EXPECT_TRUE(j.contains("sample_size"));
  EXPECT_TRUE(j.contains("posterior"));
  EXPECT_TRUE(j.contains("conflict"));
  EXPECT_EQ(run("case-study other").code, 1);
}
