#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace emvc {

// Entry point for the command-line tool, factored out of main() so tests can
// drive it in-process. `args` excludes the program name. Returns the process
// exit code: 0 success, 2 usage error, 1 runtime failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace emvc
