#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace polishkrige {

/// Runs the `polishkrige` command line. `args` excludes the program name.
/// Returns 0 on success, 1 on a pipeline or domain error (stderr line
/// `error: <category>: <message>`), 2 on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace polishkrige
