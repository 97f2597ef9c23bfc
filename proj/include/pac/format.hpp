#pragma once

#include <string>

namespace pac {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

}  // namespace pac
