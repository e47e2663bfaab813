#pragma once

#include <optional>
#include <string>
#include <vector>

namespace tflat::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_error = 1,
  exit_failed = 2,  // the run completed and certified a negative answer
  exit_usage = 64,
  exit_resource = 70,
};

enum class Mode { exact, floating };

/// Options shared by every subcommand. Unset values fall back to a per-command default,
/// and the value actually used is written into the report.
struct JobConfig {
  std::string command;
  std::optional<Mode> mode;
  std::optional<double> h;
  std::optional<double> tol;
  std::optional<int> samples;
  std::optional<double> truncation;
  std::string out;  // empty: report on stdout
  std::string pgm;
  std::string csv;

  /// Throws PreconditionError on a non-positive step, tolerance, sample count or truncation.
  void validate() const;
};

/// args excludes the program name.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace tflat::cli
