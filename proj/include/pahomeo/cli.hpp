#pragma once

#include <iosfwd>

namespace pahomeo {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 2,  // bad flags, malformed files, inputs outside the preconditions
  kExitCheck = 3,  // a certificate or internal postcondition failed
};

/// Commands: block, densify, certify, render, demo, verify.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pahomeo
