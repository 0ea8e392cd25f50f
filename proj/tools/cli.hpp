#pragma once

// Command-line front end. Kept in a library so tests can drive it without
// spawning processes.

#include <iosfwd>

namespace telegraph::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kRuntimeError = 2,
  kNotConverged = 3,
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace telegraph::cli
