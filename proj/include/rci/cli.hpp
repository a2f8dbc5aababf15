#pragma once

#include <iosfwd>

namespace rci {

inline constexpr const char* kToolVersion = "raman-ci 0.1.0";

/// Exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInvalid = 1,    // bad arguments, configuration or resolution
  kExitRejected = 2,   // fit, linearity or oracle threshold failure
};

/// Entry point of `raman-ci`. Tables go to `--out` or `out`; diagnostics go
/// to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rci
