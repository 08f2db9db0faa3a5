#pragma once

#include <ostream>
#include <string>

namespace fracwave::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDomain = 2,
  kIo = 3,
  /// A computation failed to converge, or the stability suite found a
  /// violated bound.
  kFailed = 4,
};

/// Runs the command line `argv` (argv[0] is the program name), writing
/// normal output to `out` and diagnostics to `err`. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// 17 significant digits, exponent without padding: 3.6787944117144233e-1.
std::string format_ml_value(double x);

}  // namespace fracwave::cli
