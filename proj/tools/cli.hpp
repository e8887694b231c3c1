#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace affgest::cli {

/// Process exit statuses. Stable for scripting.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIoFailure = 2,
  kTrainingFailure = 3,
  kBadInput = 4,
  kBadLabel = 5,
};

/// Runs the tool with `args` (excluding the program name), writing normal
/// output to `out` and diagnostics to `err`. Returns the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace affgest::cli
