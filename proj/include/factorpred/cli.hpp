#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "factorpred/errors.hpp"
#include "factorpred/report.hpp"
#include "factorpred/simkit.hpp"

namespace factorpred {

enum class Command { kFit, kPredict, kSimulate, kBench, kDiagnose };

struct SimulationSettings {
  std::vector<int> T;  // empty: command default
  std::vector<int> p;  // empty: command default
  int n_test = 100;
  double sigma_u = 2.0;
  double sigma_eps = 2.0;
  SlopeKind slope = SlopeKind::kSmooth;
  double rho = 0.0;
  std::uint64_t seed = 1;
  int replications = 50;
};

struct RunConfig {
  Command command = Command::kFit;
  std::filesystem::path panel_path;
  std::filesystem::path response_path;
  std::filesystem::path output_path;  // empty: standard output (fit, predict)
  int l_max = 25;
  std::optional<int> order;
  SimulationSettings sim;
  OutputFormat format = OutputFormat::kCsv;
  int threads = 0;  // 0: FACTORPRED_THREADS or hardware concurrency
};

/// Parses `factorpred <command> [flags]`. Flags may also come from a
/// `--config` file of `key = value` lines; command-line flags win.
/// Throws Error(kConfig) on invalid arguments.
RunConfig parse_command_line(int argc, const char* const* argv);

/// Checks numeric ranges and required inputs for the configured command.
void validate(const RunConfig& config);

/// Executes the configured command. Results without an output path go to
/// `out`; warnings and the JSON error record go to `log`. Returns the
/// process exit code (0 success, 2 config, 3 I/O, 4 numerical).
int run(const RunConfig& config, std::ostream& out, std::ostream& log);

/// One-line JSON error record: {"error":{"code":...,"exit_code":...,"message":...}}.
std::string error_record(std::string_view code, int exit_code, std::string_view message);

/// Entry point of the factorpred executable.
int cli_main(int argc, const char* const* argv);

}  // namespace factorpred
