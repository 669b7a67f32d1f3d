#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace matblow::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;       ///< success, or an Eternal verdict
inline constexpr int kExitError = 1;    ///< bad input, failed precondition, failed check
inline constexpr int kExitBlowup = 2;   ///< Blowup verdict / BlowupDetected

/// Runs the command line `args` (args[0] is the program name) and returns the
/// process exit code. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace matblow::cli
