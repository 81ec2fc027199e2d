#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace granular {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitBoundViolation = 2;

/// Runs one CLI invocation; `args` excludes the program name. Machine output
/// goes to `out` or to files, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace granular
