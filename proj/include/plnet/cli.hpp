#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace plnet::cli {

enum ExitCode : int { ok = 0, input_error = 1, numerical_error = 2 };

/// Runs the command line (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace plnet::cli
