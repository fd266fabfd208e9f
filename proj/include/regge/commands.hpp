#pragma once

// The four CLI commands as library calls returning a JSON report and an
// exit code.

#include <filesystem>
#include <optional>
#include <string>

#include "regge/io.hpp"

namespace regge {

struct RunConfig {
  std::filesystem::path complex_path;
  std::optional<std::filesystem::path> metric_path;
  double kappa = 10.0;
  CutoffNorm norm = CutoffNorm::supremum;
  double gamma = 1.0;
  double lambda = 1.0;
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  GramEstimator estimator = GramEstimator::naive;
  std::size_t m_inner = 64;
  std::size_t n_z0 = 1000;
  /// Step of the central differences in the thermodynamic check.
  double delta = 0.01;
  /// Reports (and the sample file of `rp`) go here; empty means none.
  std::filesystem::path output_dir;
};

/// Throws ReggeError on out-of-range values.
void validate_config(const RunConfig& c);

/// Everything needed to rerun the command, including the fixed sampler and
/// estimator settings and a digest of the input files.
Json config_echo(const RunConfig& c, const std::string& command);

enum ExitCode { exit_ok = 0, exit_validation = 1, exit_runtime = 2, exit_io = 3 };

struct CommandResult {
  int exit_code = exit_ok;
  Json report;
};

CommandResult cmd_validate(const RunConfig& c);
CommandResult cmd_action(const RunConfig& c);
CommandResult cmd_rp(const RunConfig& c);
CommandResult cmd_observables(const RunConfig& c);

/// Dispatches by name, maps exceptions to exit codes (ComplexError and
/// NotRealizableError 1, IoError 3, anything else 2) and stamps version
/// and wall time. Writes <command>_report.json into the output directory.
CommandResult run_command(const std::string& command, const RunConfig& c);

/// The report without timing fields, for comparing runs.
Json strip_timing(Json report);

}  // namespace regge
