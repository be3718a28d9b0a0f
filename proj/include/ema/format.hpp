#pragma once

#include <string>

namespace ema {

// Shortest decimal string that parses back to exactly `x` (std::to_chars).
// Non-finite values print as nan, inf, -inf.
std::string shortest(double x);

}  // namespace ema
