#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace helio::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kUsage = 2, kDataError = 3, kNumericsError = 4 };

/// Runs the command line (args excludes the program name). Human-readable
/// output goes to `out`; failures are reported on `err` as a single JSON
/// error record.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace helio::cli
