#pragma once

// Primitive types of the two-state awareness model: behavioral parameters,
// Gaussian priors over the preference shares, the S-share dynamics, the
// reporting rules and the election-outcome loadings.

#include <cstdint>

#include "ctsim/rng.hpp"

namespace ctsim {

enum class CogState { S, A };

struct BehaviorParams {
  double beta;  // weight on the stereotype draw in the S report, in [0,1]
  double xi;    // accuracy of the A report, in [1/2,1]
};

struct ProcessParams {
  double lambda;     // S->A transition intensity, > 0
  double nu = 0.0;   // optional exit/re-entry intensity, 0 <= nu < lambda
};

struct PriorSpec {
  double mu_p;
  double sigma_p;  // >= 0 (0 = degenerate prior)
  double mu_s;
  double sigma_s;
};

struct StateShares {
  double eta_s;
  double eta_a;  // always 1 - eta_s
};

// Affine coefficients of the election outcome p_bar = a0 + a1*p + a2*p_s.
// Satisfies a1 + a2 + 2*a0 = 1 for every valid parameter combination.
struct Loadings {
  double a0;
  double a1;
  double a2;
};

struct Agent {
  int y;            // stable preference, 0/1
  CogState state;
  int report;       // generated by the rule matching `state`
  int cognitive_tag = 0;  // inert, carried for the three-state type
};

void validate(const BehaviorParams& bp);
void validate(const ProcessParams& pp);
void validate(const PriorSpec& pr);

// True when mu +/- 3 sigma stays inside [0,1] for both priors; the Gaussian
// abstraction is only meant for small sigma, so callers may warn otherwise.
bool priors_well_inside_unit(const PriorSpec& pr);

// eta_s(t) = exp(-lambda t), or the exit/re-entry variant
// nu/lambda + exp(-lambda t)(1 - nu/lambda) when nu > 0.
StateShares share_stereotype(const ProcessParams& pp, double t);

Loadings election_loadings(const BehaviorParams& bp, const StateShares& shares);

double election_outcome(const Loadings& l, double p, double p_s);

// Report of one agent. S: Ber(p_s) w.p. beta, else y. A: y w.p. xi, else 1-y.
// p_s is clamped to [0,1] before Bernoulli use (microfounded path only).
int draw_report(CogState state, int y, const BehaviorParams& bp, double p_s,
                rng::Stream& stream);

inline double quadratic_welfare(double a, double p) {
  double d = a - p;
  return -(d * d);
}

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace ctsim
