#pragma once

// Command implementations behind the cascade-sim executable. Each returns the
// process exit code: 0 success, 1 verification failure, 2 usage/config error,
// 3 resource limit.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cascades/analysis.hpp"
#include "cascades/monte_carlo.hpp"
#include "json.hpp"

namespace cascades::cli {

enum ExitCode : int {
  kOk = 0,
  kVerifyFailed = 1,
  kUsage = 2,
  kResourceLimit = 3,
};

enum class RunMode { Exact, Oracle, MonteCarlo };

struct RunConfig {
  double a = 2.0;
  double b = 1.0;
  std::string schedule = "optimal:eps=0.1";
  std::int64_t t_max = 100;
  RunMode mode = RunMode::Exact;
  std::int64_t trials = 10000;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  bool stratified = false;
  // Coarser than the engine default so long exact runs stay within max_states.
  double merge_tol = 1e-4;
  double prune_floor = EngineOptions{}.prune_floor;
  std::size_t max_states = EngineOptions{}.max_states;
  bool rational = false;
  std::string out;      // CSV path; empty means stdout
  std::string summary;  // JSON path; empty means no summary
};

nlohmann::json to_json(const RunConfig& config);
// Accepts a bare config object or a run summary holding one under "config".
// Throws Error{ParseError} on missing or mistyped fields.
RunConfig config_from_json(const nlohmann::json& doc);

const char* to_string(RunMode mode);
RunMode parse_mode(const std::string& text);

// CSV headers, fixed.
inline constexpr const char* kExactCsvHeader =
    "t,p_t,map_error,E_t,tE_t,NE_t,prob_R_lt_b_over_a,prob_R_le_a_over_b,martingale_residual,"
    "pruned_mass";
inline constexpr const char* kMonteCarloCsvHeader = "t,p_t,E_t_mean,E_t_stderr,tE_t,NE_t";

void write_csv(std::ostream& os, const ErrorSeries& series);
void write_csv(std::ostream& os, const ErrorEstimate& estimate, const Schedule& schedule);

struct RunOutcome {
  int exit_code = kOk;
  std::string message;  // error text when exit_code != 0
  std::string csv;
  nlohmann::json summary;
  std::vector<double> errors;  // E_t (mean in mc mode), index t - 1
};

// Runs one configured experiment in memory.
RunOutcome execute_run(const RunConfig& config);

int cmd_constants(double a, double b, std::ostream& out, std::ostream& err);
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyGrids& grids, std::ostream& out, std::ostream& err);

struct SweepRequest {
  RunConfig base;
  std::string parameter;  // epsilon | c | alpha | a_over_b
  std::vector<double> values;
  std::string out_dir;
};

int cmd_sweep(const SweepRequest& request, std::ostream& out, std::ostream& err);

// Full command line entry point.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace cascades::cli
