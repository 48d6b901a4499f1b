#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dicnet::cli {

/// Runs the command line `args` (without the program name) and returns the
/// process exit code. Errors are reported on `err`, never thrown.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dicnet::cli
