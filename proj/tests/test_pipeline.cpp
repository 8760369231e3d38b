#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "poscert/pipeline.hpp"

using namespace poscert;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("poscert_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

Report fake(const ProblemSpec& pr) {
  Report r;
  r.config = default_config(pr, RunMode::Desk);
  return r;
}

}  // namespace

TEST(Config, ModeDefaults) {
  const auto desk = default_config(ProblemSpec::allen_cahn(Rational(1, 10), 5), RunMode::Desk);
  EXPECT_EQ(desk.problem.N, 30);
  EXPECT_EQ(desk.omega_hat.a, Rational(1, 64));
  EXPECT_EQ(desk.fem_h, Rational(1, 128));
  const auto paper = default_config(ProblemSpec::allen_cahn(Rational(1, 40), 5), RunMode::PaperExact);
  EXPECT_EQ(paper.problem.N, 80);
  EXPECT_EQ(paper.omega_hat.a, Rational(5, 512));
  EXPECT_EQ(default_config(ProblemSpec::lane_emden(5, 5), RunMode::PaperExact).problem.N, 150);
  EXPECT_TRUE(default_config(ProblemSpec::lane_emden(3, 5), RunMode::Desk).omega_hat.is_square());
}

TEST(Config, TomlOverridesAndErrors) {
  const auto c = config_from_toml(R"(
mode = "desk"
[problem]
kind = "allen-cahn"
eps = "1/20"
N = 40
[positivity]
depth = 10
[omega_hat]
inner_offset = "1/32"
h = "1/64"
[output]
dir = "runs/ac"
)",
                                  "/base");
  EXPECT_EQ(c.problem.kind, ProblemKind::AllenCahn);
  EXPECT_EQ(c.problem.eps, Rational(1, 20));
  EXPECT_EQ(c.problem.N, 40);
  EXPECT_EQ(c.depth, 10);
  EXPECT_EQ(c.omega_hat.a, Rational(1, 32));
  EXPECT_EQ(c.output_dir, "/base/runs/ac");
  EXPECT_EQ(config_from_json(to_json(c)).problem.eps, Rational(1, 20));

  auto code_of = [](const std::string& text) {
    try {
      config_from_toml(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::VerificationFailure;
  };
  EXPECT_EQ(code_of("mode = "), ErrorCode::ParseError);
  EXPECT_EQ(code_of("mode = \"fast\""), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of("[problem]\np = 4"), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of("[positivity]\ndepth = 0"), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of("[eigen]\nprojection_table = \"/no/such/file.json\""), ErrorCode::InvalidConfig);
}

TEST(Table, Layout) {
  const std::string empty = render_table({});
  EXPECT_EQ(count_lines(empty), 2);  // header and rule
  EXPECT_NE(empty.find("r1"), std::string::npos);

  const std::string one = render_table({fake(ProblemSpec::lane_emden(3, 30))});
  EXPECT_EQ(count_lines(one), 3);

  const std::string mixed =
      render_table({fake(ProblemSpec::lane_emden(3, 30)), fake(ProblemSpec::allen_cahn(Rational(1, 10), 30))});
  EXPECT_NE(mixed.find("(-m+r2)^(p-1)"), std::string::npos);
  EXPECT_NE(mixed.find("eps^-2"), std::string::npos);
  EXPECT_EQ(count_lines(mixed), 3 + 1 + 3);
  EXPECT_EQ(table_json({}).size(), 0u);
}

TEST(ExitCodes, Mapping) {
  Report r = fake(ProblemSpec::lane_emden(3, 30));
  EXPECT_EQ(exit_code(r), 1);  // nothing ran
  r.failed_stage = "existence";
  r.error_code = ErrorCode::NoAdmissibleAlpha;
  EXPECT_EQ(exit_code(r), 2);
  r.error_code = ErrorCode::MissingConstant;
  EXPECT_EQ(exit_code(r), 1);
  r.failed_stage.clear();
  r.error_code.reset();
  r.positivity = PositivityCertificate{};
  r.positivity->verdict = true;
  EXPECT_EQ(exit_code(r), 0);
  r.positivity->radius_source = "assumed";
  EXPECT_EQ(exit_code(r), 2);
  r.positivity->verdict = false;
  r.positivity->radius_source = "existence";
  EXPECT_EQ(exit_code(r), 2);
}

TEST(Toolchain, Attestation) {
  const auto j = toolchain_attestation();
  EXPECT_TRUE(j.at("rounding_mode_nearest").get<bool>());
  EXPECT_TRUE(j.at("fp_contract_off").get<bool>());
  EXPECT_TRUE(j.at("directed_rounding").get<bool>());
}

TEST(Pipeline, MissingConstantHaltsAtEigen) {
  const fs::path dir = scratch("missing");
  {
    std::ofstream t(dir / "table.json");
    t << R"({"dimension": 2, "entries": {"1": "0x1.a20bd700c2c3ep-3"}})";
  }
  RunConfig cfg = default_config(ProblemSpec::lane_emden(3, 8), RunMode::Desk);
  cfg.problem.N = 8;
  cfg.projection_table = (dir / "table.json").string();
  cfg.output_dir = (dir / "run").string();
  const Report r = run_pipeline(cfg);
  EXPECT_EQ(r.failed_stage, "eigen");
  ASSERT_TRUE(r.error_code.has_value());
  EXPECT_EQ(*r.error_code, ErrorCode::MissingConstant);
  EXPECT_EQ(exit_code(r), 1);
  // Partial artifacts stay on disk.
  EXPECT_TRUE(fs::exists(dir / "run" / "u_hat.txt"));
  const Report back = load_report((dir / "run").string());
  EXPECT_EQ(back.failed_stage, "eigen");
  EXPECT_EQ(back.error_code, r.error_code);
}

TEST(Pipeline, ReproducibleAndTraceable) {
  const fs::path dir = scratch("repro");
  RunConfig cfg = default_config(ProblemSpec::lane_emden(3, 26), RunMode::Desk);
  cfg.problem.N = 26;
  cfg.depth = 9;
  cfg.exact_degree_limit = 60;
  cfg.output_dir = (dir / "a").string();
  const Report a = run_pipeline(cfg);
  ASSERT_TRUE(a.failed_stage.empty()) << a.error;
  EXPECT_TRUE(a.verdict);
  EXPECT_EQ(exit_code(a), 0);
  cfg.output_dir = (dir / "b").string();
  const Report b = run_pipeline(cfg);
  for (const char* f : {"u_hat.txt", "existence.json", "positivity.json", "eigen.json"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;

  // The table row rebuilt from the stored certificates matches the live run.
  const Report loaded = load_report((dir / "a").string());
  EXPECT_EQ(table_json({loaded}), table_json({a}));
  EXPECT_EQ(render_table({loaded}), render_table({a}));
  const auto row = table_json({loaded})[0];
  EXPECT_EQ(row.at("r1").get<double>(), loaded.existence->alpha);
  EXPECT_EQ(row.at("threshold").get<double>(), loaded.positivity->lane_emden->threshold);
}

TEST(Config, ShippedRunFilesLoad) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(fs::path(POSCERT_CONFIG_DIR) / "runs")) {
    if (e.path().extension() != ".toml") continue;
    const RunConfig c = load_config(e.path().string());
    EXPECT_FALSE(c.output_dir.empty()) << e.path();
    ++n;
  }
  EXPECT_GE(n, 3);
}
