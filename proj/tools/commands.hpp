#pragma once

#include <iosfwd>

namespace corex::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kUnsupported = 3 };

/// Runs the `corex` command line. Diagnostics go to `err`, summaries to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace corex::cli
