#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xsect::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,      // usage, I/O, conditioning and other errors
  kNonexistence = 2, // NoSection, NoWavelet, DetOne, MixedModuli
  kCheckFailed = 3,  // a verification ran and reported failures
};

/// Runs one command. `args` excludes the program name. The JSON result goes
/// to `out` (or to --out), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xsect::cli
