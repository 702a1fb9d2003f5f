#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace maxsurf::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { ok = 0, check_failed = 1, usage_error = 2, numerical_error = 3 };

/// Runs one subcommand. args excludes the program name. Normal output goes to
/// `out`, error JSON to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, char** argv);

}  // namespace maxsurf::cli
