#pragma once

#include <string>

namespace ctsim::fmt {

// Fixed 12-significant-digit rendering so CSV outputs are byte-stable for
// golden tests. Negative zero is normalized to "0".
std::string sig12(double v);

std::string fixed(double v, int decimals);

}  // namespace ctsim::fmt
