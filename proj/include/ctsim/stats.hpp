#pragma once

#include <string>

namespace ctsim::stats {

// Standard normal CDF via erfc; independent of the kernel inverse CDF.
double normal_cdf(double x);

// Two-sided normal p-value of a z statistic.
double p_two_sided(double z);

struct StarLegend {
  double one;    // p below this gets *
  double two;    // **
  double three;  // ***
};

// The published tables disagree on their star legends, so the legend is a
// per-report parameter rather than a constant.
inline constexpr StarLegend kLegendLoose{0.10, 0.05, 0.01};
inline constexpr StarLegend kLegendStrict{0.05, 0.01, 0.001};

std::string stars(double p_value, const StarLegend& legend);

}  // namespace ctsim::stats
