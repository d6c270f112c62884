#include "ctsim/stats.hpp"

#include <cmath>

namespace ctsim::stats {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double p_two_sided(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

std::string stars(double p_value, const StarLegend& legend) {
  if (p_value < legend.three) return "***";
  if (p_value < legend.two) return "**";
  if (p_value < legend.one) return "*";
  return "";
}

}  // namespace ctsim::stats
