#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace goaltrack {

/// Entry point of the `goaltrack` tool. `args` excludes the program name.
/// Returns 0 on success, 2 on usage errors, 1 on any other failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace goaltrack
