#pragma once

// End-to-end run: approximate solution, inverse bound, existence radius,
// eigenvalue data for the comparison domain, positivity. Each stage persists
// its artifact before the next one starts.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "poscert/approx.hpp"
#include "poscert/existence.hpp"
#include "poscert/fem_eig.hpp"
#include "poscert/positivity.hpp"
#include "poscert/problem.hpp"

namespace poscert {

enum class RunMode { Desk, PaperExact };

std::string to_string(RunMode m);
RunMode parse_run_mode(const std::string& s);

struct RunConfig {
  ProblemSpec problem;
  RunMode mode = RunMode::Desk;
  int depth = 12;
  FrameDomain omega_hat;     // Allen-Cahn comparison domain
  Rational fem_h;            // mesh size for lambda_1(omega_hat)
  int eig_order = 0;         // 0: same as N
  int exact_degree_limit = 200;
  int min_refine = 2;
  std::string projection_table;  // C_N^0 table; "" for the shipped one
  std::string fem_table;
  std::string init_path;         // start Newton from this u_hat file
  std::string output_dir;        // "" keeps everything in memory

  /// Throws InvalidConfig.
  void validate() const;
};

/// Defaults per mode: desk runs N = 30 on the 1/64 frame with h = 1/128;
/// paper-exact runs the published orders on the 5/512 frame with h = 1/1024.
RunConfig default_config(const ProblemSpec& problem, RunMode mode);

/// Reads a TOML run file. Keys missing from the file take mode defaults.
RunConfig load_config(const std::string& path);
RunConfig config_from_toml(const std::string& text, const std::string& base_dir = ".");
nlohmann::json to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);

struct StageTiming {
  std::string stage;
  double seconds = 0;
};

struct Report {
  RunConfig config;
  std::optional<SolveReport> solve;
  std::optional<ExistenceCertificate> existence;
  std::optional<PositivityCertificate> positivity;
  std::vector<StageTiming> timings;
  nlohmann::json toolchain;
  std::string failed_stage;  // empty on a complete run
  std::optional<ErrorCode> error_code;
  std::string error;
  bool verdict = false;
};

/// Compiler, flags and a runtime check of the rounding mode.
nlohmann::json toolchain_attestation();

/// Runs every stage. A stage failure is recorded in the report with the
/// stage named; earlier artifacts stay on disk.
Report run_pipeline(const RunConfig& config);

nlohmann::json to_json(const Report& r);

/// Rebuilds a report from a run directory: config.json, existence.json and
/// positivity.json, as far as they exist. No recomputation.
Report load_report(const std::string& dir);

/// One aligned table per problem kind, in the column order of the published
/// tables, followed by nothing else. Empty input prints the header only.
std::string render_table(const std::vector<Report>& reports);
nlohmann::json table_json(const std::vector<Report>& reports);

/// Exit status for a report: 0 certified positive, 2 sound "don't know".
int exit_code(const Report& r);

/// True for failures that mean "not verified" rather than a malfunction.
bool is_verification_failure(ErrorCode code);

}  // namespace poscert
