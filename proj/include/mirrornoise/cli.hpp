#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mirrornoise/error.hpp"

namespace mirrornoise {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitParse = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitInfeasible = 4;

int exit_code_for(ErrorKind k);

// Runs the command line. args[0] is the program name. Data goes to `out`
// only when the command succeeds; diagnostics always go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mirrornoise
