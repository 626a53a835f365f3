#pragma once

// Command-line front end: certify, solve, compare.
//
// Exit codes: 0 success, 1 input or configuration error, 2 certification
// refused, 3 numeric degeneracy.

#include <ostream>
#include <string>
#include <vector>

namespace minsum {

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitRefused = 2, kExitDegenerate = 3 };

/// `args` excludes the program name. Normal output goes to `out`,
/// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace minsum
