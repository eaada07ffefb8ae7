#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace abba::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInputError = 2,
  kUndefined = 3,
};

// Runs the abba command line with `args` (program name excluded), writing
// normal output to `out` and diagnostics to `err`. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace abba::cli
