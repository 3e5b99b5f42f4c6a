#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = opa::cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path tmp_dir() {
  const char* env = std::getenv("OPA_TEST_TMP");
  fs::path p = env ? fs::path(env) : fs::temp_directory_path() / "opa_cli_test";
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST(Compute, OneMinusZExample) {
  const auto r = run({"compute", "--roots", "0:1", "--p", "2", "--alpha", "0", "--n", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["coefficients"][0][0].get<double>(), 2.0 / 3, 1e-12);
  EXPECT_NEAR(j["coefficients"][1][0].get<double>(), 1.0 / 3, 1e-12);
  EXPECT_EQ(j["coefficients"][0][1].get<double>(), 0.0);
  EXPECT_NEAR(j["norm_sq"].get<double>(), 1.0 / 3, 1e-12);
  EXPECT_GE(j["optimal_norm"].get<double>(), j["lower_bound"].get<double>() * (1 - 1e-12));
  EXPECT_TRUE(j["converged"].get<bool>());
}

TEST(Compute, RootsAreNormalizedAtOrigin) {
  const json j = json::parse(run({"compute", "--roots", "pi:2", "--p", "3", "--n", "2"}).out);
  EXPECT_EQ(j["f"][0][0].get<double>(), 1.0);
  EXPECT_EQ(j["f"].size(), 3u);
}

TEST(Compute, SolverSelection) {
  const auto base = std::vector<std::string>{"compute", "--roots", "0:1,pi:1", "--p", "2", "--alpha", "1", "--n", "6"};
  double norm = -1.0;
  for (std::string s : {"convex", "hilbert", "structural"}) {
    auto args = base;
    args.insert(args.end(), {"--solver", s});
    const auto r = run(args);
    ASSERT_EQ(r.code, 0) << s << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["solver"], s);
    if (norm < 0) norm = j["optimal_norm"].get<double>();
    EXPECT_NEAR(j["optimal_norm"].get<double>(), norm, 1e-9);
  }
  const json st = json::parse(run({"compute", "--roots", "0:1,pi:1", "--p", "3", "--n", "6", "--solver", "structural"}).out);
  EXPECT_EQ(st["constants"].size(), 2u);
}

TEST(Compute, FlatCaseDiagnostics) {
  const auto r = run({"compute", "--coeffs", "1,-0.5", "--p", "1", "--alpha", "1", "--n", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["optimal_norm"].get<double>(), 1.0, 1e-6);
  EXPECT_FALSE(j["unique_along_axes"].get<bool>());
  EXPECT_TRUE(j["ortho_residual_max"].is_null());
}

TEST(Compute, ComplexCoefficientsJson) {
  const auto r = run({"compute", "--coeffs", "[[1,0],[0,-1]]", "--p", "2", "--n", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["f"][1][1].get<double>(), -1.0);
  EXPECT_NEAR(j["norm_sq"].get<double>(), 0.2, 1e-12);
}

TEST(Compute, NotConvergedExitsThree) {
  const auto r = run({"compute", "--roots", "0:2", "--p", "3", "--n", "16", "--solver", "convex", "--max-iters", "1",
                      "--tol", "1e-300"});
  EXPECT_EQ(r.code, 3);
  const json j = json::parse(r.out);
  EXPECT_FALSE(j["converged"].get<bool>());
}

TEST(Compute, WritesToFile) {
  const auto path = tmp_dir() / "compute.json";
  fs::remove(path);
  const auto r = run({"compute", "--roots", "0:1", "--p", "2", "--n", "2", "--out", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_NEAR(json::parse(slurp(path))["norm_sq"].get<double>(), 0.25, 1e-12);
}

TEST(Classify, Examples) {
  auto r = run({"classify", "--p", "1", "--alpha", "0"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "not cyclic");
  r = run({"classify", "--p", "2", "--alpha", "1"});
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "cyclic");
  EXPECT_NE(r.out.find("regime: log"), std::string::npos);
  r = run({"classify", "--p", "inf", "--alpha", "1.5"});
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "not cyclic");
  EXPECT_EQ(run({"classify", "--p", "0.5", "--alpha", "0"}).code, 2);
  EXPECT_EQ(run({"classify", "--p", "2"}).out.substr(0, 6), "cyclic");  // default weight alpha = 0
}

TEST(Sweep, FittedExponentOnOneMinusZ) {
  const auto path = tmp_dir() / "rates.csv";
  const auto r = run({"sweep", "--roots", "0:1", "--p", "2", "--alpha", "0", "--n", "64..1024", "--out", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto pos = r.out.find("fitted_exponent=");
  ASSERT_NE(pos, std::string::npos) << r.out;
  EXPECT_NEAR(std::stod(r.out.substr(pos + 16)), -1.0, 0.05);
  std::istringstream csv(slurp(path));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, opa::kCsvHeader);
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 5);
}

TEST(Sweep, StdoutCsvAndSummaryOnStderr) {
  const auto r = run({"sweep", "--coeffs", "1,0,-1", "--p", "2", "--n", "4..32"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), opa::kCsvHeader);
  EXPECT_NE(r.err.find("fitted_exponent="), std::string::npos);
}

TEST(Sweep, ByteIdenticalRepeats) {
  const std::vector<std::string> args{"sweep", "--roots", "0:1,pi/2:1", "--p", "3", "--alpha", "0.5", "--n", "2..32"};
  const auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const std::vector<std::string> c{"compute", "--roots", "0:2,pi:1", "--p", "1.5", "--n", "9"};
  EXPECT_EQ(run(c).out, run(c).out);
}

TEST(Sweep, TimingFlagFillsWallMs) {
  const auto r = run({"sweep", "--roots", "0:1", "--p", "3", "--n", "8..16", "--timing"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.find(",0\n"), std::string::npos);
}

TEST(Verify, ReportAllPass) {
  const auto r = run({"verify", "--roots", "0:2,pi:1", "--p", "1.5", "--alpha", "0", "--n", "4..16", "--seed", "11"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("ALL PASS"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
  EXPECT_NE(r.out.find("PASS structural_system"), std::string::npos);
}

TEST(Verify, HilbertComparisonAtPTwo) {
  const auto r = run({"verify", "--roots", "pi/3:1,-pi/3:1", "--p", "2", "--alpha", "-1", "--n", "8"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("PASS hilbert_vs_convex"), std::string::npos);
}

TEST(ClosedForm, Json) {
  const auto r = run({"closed-form", "--p", "2", "--alpha", "0", "--n", "3", "--d", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["f"], "1 - z^2");
  EXPECT_NEAR(j["coefficients"][2][0].get<double>(), 1.0 / 3, 1e-15);
  EXPECT_EQ(j["coefficients"][1][0].get<double>(), 0.0);
  EXPECT_NEAR(j["norm_p_power"].get<double>(), 1.0 / 3, 1e-15);
  EXPECT_EQ(run({"closed-form", "--p", "1", "--n", "3"}).code, 2);
}

TEST(Config, FileAndOverride) {
  const auto cfg = tmp_dir() / "cfg.json";
  write_file(cfg, R"({"problem":{"circle_roots":[{"angle":"0","mult":1}]},
                      "space":{"p":2,"weight":{"kind":"power","alpha":0}},
                      "n":1, "solver_opts":{"grad_tol":1e-10,"max_iters":10000,"flat_tol":1e-6}})");
  auto r = run({"compute", "--config", cfg.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json::parse(r.out)["norm_sq"].get<double>(), 1.0 / 3, 1e-12);
  r = run({"compute", "--config", cfg.string(), "--n", "2"});
  EXPECT_NEAR(json::parse(r.out)["norm_sq"].get<double>(), 0.25, 1e-12);
}

TEST(Config, TableWeightFile) {
  const auto wf = tmp_dir() / "weight.json";
  write_file(wf, R"({"kind":"table","values":[1,2,3],"tail":"power"})");
  const auto r = run({"compute", "--coeffs", "1,-1", "--p", "2", "--weight-file", wf.string(), "--n", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  // n = 0: c minimises (1-c)^2 + 2 c^2, so c = 1/3 and the norm^2 is 2/3.
  EXPECT_NEAR(json::parse(r.out)["norm_sq"].get<double>(), 2.0 / 3, 1e-12);
}

TEST(Errors, SchemaViolationsExitTwo) {
  const std::vector<std::vector<std::string>> bad{
      {"compute", "--roots", "0:1", "--p", "abc", "--n", "1"},
      {"compute", "--roots", "0:1", "--coeffs", "1,-1", "--p", "2", "--n", "1"},
      {"compute", "--p", "2", "--n", "1"},
      {"compute", "--roots", "0:1", "--p", "2"},
      {"compute", "--roots", "0:0", "--p", "2", "--n", "1"},
      {"compute", "--roots", "0:1,2pi:1", "--p", "2", "--n", "1"},
      {"compute", "--roots", "0:1", "--p", "0.5", "--n", "1"},
      {"compute", "--roots", "0:1", "--p", "2", "--n", "1", "--solver", "magic"},
      {"compute", "--coeffs", "0,0", "--p", "2", "--n", "1"},
      {"compute", "--roots", "0:1", "--p", "2", "--n", "1..4"},
      {"sweep", "--roots", "0:1", "--p", "2", "--n", "8..4"},
      {"compute", "--coeffs", "1,-1", "--p", "1", "--n", "1", "--solver", "convex"},
      {"compute", "--coeffs", "1,-1,0.5", "--p", "3", "--n", "1", "--solver", "structural"},
      {"frobnicate"},
      {},
  };
  for (const auto& args : bad) {
    const auto r = run(args);
    std::string joined;
    for (const auto& a : args) joined += a + " ";
    EXPECT_EQ(r.code, 2) << joined << "\n" << r.err;
  }
}

TEST(Errors, BadConfigExitsTwo) {
  const auto cfg = tmp_dir() / "bad.json";
  write_file(cfg, R"({"problem":{"coeffs":[1,-1]},"space":{"p":2},"n":1,"colour":"blue"})");
  EXPECT_EQ(run({"compute", "--config", cfg.string()}).code, 2);
  write_file(cfg, R"({"problem":{"coeffs":[1,-1],"circle_roots":[]},"n":1})");
  EXPECT_EQ(run({"compute", "--config", cfg.string()}).code, 2);
  write_file(cfg, "{not json");
  EXPECT_EQ(run({"compute", "--config", cfg.string()}).code, 2);
  EXPECT_EQ(run({"compute", "--config", (tmp_dir() / "missing.json").string()}).code, 2);
  write_file(cfg, R"({"problem":{"coeffs":[1,-1]},"n":1,"output":{"format":"csv"}})");
  EXPECT_EQ(run({"compute", "--config", cfg.string()}).code, 2);
}

TEST(Errors, HelpExitsZero) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("compute"), std::string::npos);
}

TEST(Parse, Angles) {
  using opa::cli::parse_angle;
  EXPECT_NEAR(std::arg(parse_angle("pi/2").unit_point()), std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(std::arg(parse_angle("3pi/4").unit_point()), 3 * std::numbers::pi / 4, 1e-15);
  EXPECT_NEAR(std::arg(parse_angle("-pi/3").unit_point()), -std::numbers::pi / 3, 1e-15);
  EXPECT_EQ(parse_angle("0").unit_point(), opa::cplx(1.0));
  EXPECT_NEAR(std::arg(parse_angle("0.25").unit_point()), 0.25, 1e-15);
  EXPECT_THROW(parse_angle("pie"), opa::cli::SchemaError);
}

TEST(Parse, DegreeRange) {
  using opa::cli::parse_n_range;
  EXPECT_EQ(parse_n_range("64..1024"), (std::vector<std::size_t>{64, 128, 256, 512, 1024}));
  EXPECT_EQ(parse_n_range("7"), (std::vector<std::size_t>{7}));
  EXPECT_THROW(parse_n_range("a..b"), opa::cli::SchemaError);
}
