#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ove::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitNumerical = 1,  // divergence, NaN, non-convergence
  kExitConfig = 2,     // bad flags or argument values
  kExitData = 3,       // unreadable or inconsistent input files
};

/// Runs `ove <args...>`; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ove::cli
