#pragma once

#include <string>

namespace goaltrack {

/// Shortest decimal text that parses back to the same double ('.' separator).
std::string format_double(double v);

} // namespace goaltrack
