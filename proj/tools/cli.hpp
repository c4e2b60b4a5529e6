#pragma once

#include <iosfwd>

namespace ehsched::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kNotFound = 3,
  kInvalidScenario = 4,
  kInfeasible = 5,
  kViolations = 6,
};

/// Entry point of the ehsched tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ehsched::cli
