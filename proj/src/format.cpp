#include "ctsim/format.hpp"

#include <cstdio>

namespace ctsim::fmt {

std::string sig12(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fixed(double v, int decimals) {
  if (v == 0.0) v = 0.0;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace ctsim::fmt
