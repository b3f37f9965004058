#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace logdrift::cli {

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kInputError = 2,
  kInvariantViolation = 3,
  kDetection = 4,
};

/// Runs the `logdrift` command line. `args` excludes the program name. Output
/// files named with `-` (or omitted) go to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace logdrift::cli
