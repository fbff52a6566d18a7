#pragma once

#include <string>

namespace tscale {

// Shortest decimal text that parses back to the same double; "inf", "-inf"
// and "nan" for non-finite values.
std::string format_double(double v);

}  // namespace tscale
