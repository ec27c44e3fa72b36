#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace padic {

/// Runs the `padic` command line (args excludes the program name) and
/// returns the exit code: 0 pass, 1 certified failure under --strict,
/// 2 usage or parse error, 3 domain or precision error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace padic
