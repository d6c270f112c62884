#pragma once

// Closed forms for the two-state model: Gaussian posterior loadings, the two
// welfare benchmarks, the election bias, the monotonicity regime of the
// institutional welfare in poll time, and the zero-bias time.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctsim/model.hpp"

namespace ctsim {

// p_hat = g0 + g1*p + g2*p_s, the conditional expectation E[p | p_bar]
// under joint normality.
struct PosteriorLoadings {
  double g0;
  double g1;
  double g2;
};

struct WelfareReport {
  double t;
  double eta_s;
  double w_p;   // positive welfare, <= 0
  double w_i;   // institutional welfare, equals w_p - bias
  double bias;  // >= 0
};

enum class Regime { AlwaysIncreasing, InteriorMaximum, AlwaysDecreasing };

struct RegimeResult {
  Regime regime;
  double threshold_eta;          // stationary share of W_I; may exit [0,1]
  std::optional<double> t_max;   // set for InteriorMaximum
};

const char* to_string(Regime r);

struct ZeroBiasResult {
  enum class Status { Found, NoSolution, NoConvergence };
  Status status;
  double t_star = 0.0;        // valid when status != NoSolution
  double residual_bias = 0.0; // bias evaluated at t_star
};

PosteriorLoadings posterior_loadings(const Loadings& l, const PriorSpec& pr);

// W_P = -E[(p_hat - p)^2] = -a2^2 sigma_s^2 sigma_p^2 / D,
// with the D = 0 degenerate outcome worth the prior variance.
double welfare_positive(const Loadings& l, const PriorSpec& pr);

// W_I = -E[(p_bar - p)^2].
double welfare_institutional(const Loadings& l, const PriorSpec& pr);

// B = E[(p_bar - p_hat)^2] >= 0.
double election_bias(const Loadings& l, const PosteriorLoadings& g,
                     const PriorSpec& pr);

// Monotonicity of t -> W_I(t) under the equal-moments restriction
// mu_p == mu_s, sigma_p == sigma_s (the proofs' setting).
RegimeResult classify_regime(const BehaviorParams& bp, const PriorSpec& pr,
                             double lambda);

// Sampled dW_I/dt sign profile for arbitrary moments. This is the numerical
// fallback when the equal-moments restriction does not hold.
struct NumericRegimeProfile {
  enum class Pattern { NonDecreasing, NonIncreasing, IncreaseThenDecrease,
                       DecreaseThenIncrease, Mixed };
  Pattern pattern;
  std::optional<double> t_turn;
  std::string label;  // always "numerical"
};

NumericRegimeProfile classify_regime_numeric(const BehaviorParams& bp,
                                             const PriorSpec& pr, double lambda,
                                             double t_hi, int grid_points = 200);

// Zero-bias poll time. Requires mu_p == mu_s. With xi == 1 the closed form
// t* = -log(sigma_p^2 / (beta (sigma_p^2 + sigma_s^2))) / lambda applies,
// boundary equality mapping to t* = 0. With xi < 1 the loadings equation is
// solved by a coarse sign scan plus bisection; a root whose residual bias
// exceeds 1e-10 is reported as NoConvergence, distinct from NoSolution.
ZeroBiasResult zero_bias_time(const BehaviorParams& bp, const PriorSpec& pr,
                              double lambda);

std::vector<WelfareReport> welfare_curve(const BehaviorParams& bp,
                                         const PriorSpec& pr,
                                         const ProcessParams& proc,
                                         std::span<const double> t_grid);

}  // namespace ctsim
