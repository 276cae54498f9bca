#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shapesense::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kIo = 3, kData = 4 };

/// Runs the command line `args` (args[0] is the program name), writing
/// progress to out and diagnostics to err. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shapesense::cli
