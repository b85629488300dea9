#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dcaa {

// Entry point of the `dcaa` tool; `args` excludes the program name.
// Returns 0 on success, 1 on a failed run, 2 on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dcaa
