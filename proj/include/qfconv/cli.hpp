#pragma once

#include <iosfwd>

namespace qfconv {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitValidation = 2,
  kExitNumerical = 3,
};

/// Entry point for `qfconv <simulate|sweep|fit|report> [flags]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qfconv
