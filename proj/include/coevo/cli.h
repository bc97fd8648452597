#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coevo::cli {

enum ExitCode : int { success = 0, not_converged = 1, input_error = 2 };

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

} // namespace coevo::cli
