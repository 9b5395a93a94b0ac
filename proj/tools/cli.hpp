#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace maxfield::cli {

enum ExitCode : int {
  kSuccess = 0,
  kConfigError = 2,
  kSimulationRefused = 3,
  kNotConverged = 4,
};

/// Runs one command line (without the program name). Reports go to out,
/// diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace maxfield::cli
