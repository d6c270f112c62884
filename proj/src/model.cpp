#include "ctsim/model.hpp"

#include <cmath>
#include <stdexcept>

namespace ctsim {

void validate(const BehaviorParams& bp) {
  if (!(bp.beta >= 0.0 && bp.beta <= 1.0))
    throw std::invalid_argument("beta must lie in [0,1]");
  if (!(bp.xi >= 0.5 && bp.xi <= 1.0))
    throw std::invalid_argument("xi must lie in [1/2,1]");
}

void validate(const ProcessParams& pp) {
  if (!(pp.lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (!(pp.nu >= 0.0 && pp.nu < pp.lambda))
    throw std::invalid_argument("nu must satisfy 0 <= nu < lambda");
}

void validate(const PriorSpec& pr) {
  if (!(pr.sigma_p >= 0.0) || !(pr.sigma_s >= 0.0))
    throw std::invalid_argument("prior standard deviations must be >= 0");
  if (!std::isfinite(pr.mu_p) || !std::isfinite(pr.mu_s))
    throw std::invalid_argument("prior means must be finite");
}

bool priors_well_inside_unit(const PriorSpec& pr) {
  auto inside = [](double mu, double sigma) {
    return mu - 3.0 * sigma >= 0.0 && mu + 3.0 * sigma <= 1.0;
  };
  return inside(pr.mu_p, pr.sigma_p) && inside(pr.mu_s, pr.sigma_s);
}

StateShares share_stereotype(const ProcessParams& pp, double t) {
  validate(pp);
  if (!(t >= 0.0)) throw std::invalid_argument("t must be >= 0");
  double eta_s;
  if (pp.nu == 0.0) {
    eta_s = std::exp(-pp.lambda * t);
  } else {
    double floor = pp.nu / pp.lambda;
    eta_s = floor + std::exp(-pp.lambda * t) * (1.0 - floor);
  }
  return StateShares{eta_s, 1.0 - eta_s};
}

Loadings election_loadings(const BehaviorParams& bp, const StateShares& shares) {
  validate(bp);
  double u = 1.0 - bp.xi;
  double a0 = shares.eta_a * u;
  double a2 = bp.beta * shares.eta_s;
  double a1 = 1.0 - a2 - 2.0 * a0;
  return Loadings{a0, a1, a2};
}

double election_outcome(const Loadings& l, double p, double p_s) {
  return l.a0 + l.a1 * p + l.a2 * p_s;
}

int draw_report(CogState state, int y, const BehaviorParams& bp, double p_s,
                rng::Stream& stream) {
  validate(bp);
  if (state == CogState::S) {
    if (stream.next_bernoulli(bp.beta)) return stream.next_bernoulli(clamp01(p_s)) ? 1 : 0;
    return y;
  }
  return stream.next_bernoulli(bp.xi) ? y : 1 - y;
}

}  // namespace ctsim
