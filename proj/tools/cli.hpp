#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lexda::cli {

/// Exit statuses; stable across releases.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDataError = 3,
  kCheckpointError = 4,
};

/// Runs one command. `args` excludes the program name. Results go to `out`,
/// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lexda::cli
