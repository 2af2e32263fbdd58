#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ore::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kInfeasible = 2,
    kExhausted = 3,
    kIoError = 4,
    kSolverMismatch = 5,
};

/// Runs one command line (without the program name). Structured output goes
/// to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ore::cli
