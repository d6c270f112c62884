#include "ctsim/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctsim {

namespace {

double posterior_denominator(const Loadings& l, const PriorSpec& pr) {
  double vx = pr.sigma_p * pr.sigma_p;
  double vy = pr.sigma_s * pr.sigma_s;
  return l.a1 * l.a1 * vx + l.a2 * l.a2 * vy;
}

}  // namespace

const char* to_string(Regime r) {
  switch (r) {
    case Regime::AlwaysIncreasing: return "AlwaysIncreasing";
    case Regime::InteriorMaximum: return "InteriorMaximum";
    case Regime::AlwaysDecreasing: return "AlwaysDecreasing";
  }
  return "?";
}

PosteriorLoadings posterior_loadings(const Loadings& l, const PriorSpec& pr) {
  double vx = pr.sigma_p * pr.sigma_p;
  double vy = pr.sigma_s * pr.sigma_s;
  double d = posterior_denominator(l, pr);
  if (d <= 0.0) return PosteriorLoadings{pr.mu_p, 0.0, 0.0};  // uninformative
  double g1 = l.a1 * l.a1 * vx / d;
  double g2 = l.a1 * l.a2 * vx / d;
  double g0 = (l.a2 * l.a2 * vy * pr.mu_p - l.a1 * l.a2 * vx * pr.mu_s) / d;
  return PosteriorLoadings{g0, g1, g2};
}

double welfare_positive(const Loadings& l, const PriorSpec& pr) {
  double vx = pr.sigma_p * pr.sigma_p;
  double vy = pr.sigma_s * pr.sigma_s;
  double d = posterior_denominator(l, pr);
  if (d <= 0.0) return -vx;
  return -(l.a2 * l.a2 * vy * vx / d);
}

double welfare_institutional(const Loadings& l, const PriorSpec& pr) {
  double mean = l.a0 + (l.a1 - 1.0) * pr.mu_p + l.a2 * pr.mu_s;
  double var = (l.a1 - 1.0) * (l.a1 - 1.0) * pr.sigma_p * pr.sigma_p +
               l.a2 * l.a2 * pr.sigma_s * pr.sigma_s;
  return -(mean * mean + var);
}

double election_bias(const Loadings& l, const PosteriorLoadings& g,
                     const PriorSpec& pr) {
  double d0 = l.a0 - g.g0;
  double d1 = l.a1 - g.g1;
  double d2 = l.a2 - g.g2;
  double mean = d0 + d1 * pr.mu_p + d2 * pr.mu_s;
  return mean * mean + d1 * d1 * pr.sigma_p * pr.sigma_p +
         d2 * d2 * pr.sigma_s * pr.sigma_s;
}

RegimeResult classify_regime(const BehaviorParams& bp, const PriorSpec& pr,
                             double lambda) {
  validate(bp);
  validate(pr);
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (pr.mu_p != pr.mu_s || pr.sigma_p != pr.sigma_s)
    throw std::invalid_argument(
        "classify_regime requires equal moments (mu_p == mu_s, sigma_p == "
        "sigma_s); use classify_regime_numeric otherwise");

  double mu = pr.mu_p;
  double v = pr.sigma_p * pr.sigma_p;
  double u = 1.0 - bp.xi;
  double k = (1.0 - 2.0 * mu) * (1.0 - 2.0 * mu) + 4.0 * v;
  double num = 2.0 * u * u * k - 4.0 * bp.beta * v * u;
  double den = 4.0 * bp.beta * bp.beta * v - 8.0 * bp.beta * v * u + 2.0 * u * u * k;

  // den = 4v((beta-u)^2 + u^2) + 2u^2(1-2mu)^2 >= 0, zero only at beta=0, xi=1
  // where W_I is identically zero.
  double threshold = den > 0.0 ? num / den : 0.0;

  // E[(p_bar - p)^2] is quadratic in eta_s with its vertex at `threshold`, so
  // W_I(t) rises while eta_s(t) > threshold and falls after.
  if (threshold <= 0.0)
    return RegimeResult{Regime::AlwaysIncreasing, threshold, std::nullopt};
  if (threshold >= 1.0)
    return RegimeResult{Regime::AlwaysDecreasing, threshold, std::nullopt};
  return RegimeResult{Regime::InteriorMaximum, threshold,
                      -std::log(threshold) / lambda};
}

NumericRegimeProfile classify_regime_numeric(const BehaviorParams& bp,
                                             const PriorSpec& pr, double lambda,
                                             double t_hi, int grid_points) {
  validate(bp);
  validate(pr);
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (!(t_hi > 0.0) || grid_points < 2)
    throw std::invalid_argument("need t_hi > 0 and at least 2 grid points");

  ProcessParams proc{lambda, 0.0};
  auto wi_at = [&](double t) {
    Loadings l = election_loadings(bp, share_stereotype(proc, t));
    return welfare_institutional(l, pr);
  };
  const double h = 1e-5;
  const double dead = 1e-11;
  int n_pos = 0, n_neg = 0, flips = 0, last_sign = 0;
  std::optional<double> t_turn;
  for (int i = 0; i < grid_points; ++i) {
    double t = h + (t_hi - h) * double(i) / double(grid_points - 1);
    double fd = wi_at(t + h) - wi_at(t - h);
    int s = fd > dead ? 1 : (fd < -dead ? -1 : 0);
    if (s > 0) ++n_pos;
    if (s < 0) ++n_neg;
    if (s != 0) {
      if (last_sign != 0 && s != last_sign) {
        ++flips;
        if (!t_turn) t_turn = t;
      }
      last_sign = s;
    }
  }
  using Pattern = NumericRegimeProfile::Pattern;
  Pattern pat;
  if (flips == 0)
    pat = n_neg == 0 ? Pattern::NonDecreasing : Pattern::NonIncreasing;
  else if (flips == 1)
    pat = last_sign < 0 ? Pattern::IncreaseThenDecrease
                        : Pattern::DecreaseThenIncrease;
  else
    pat = Pattern::Mixed;
  return NumericRegimeProfile{pat, t_turn, "numerical"};
}

namespace {

// LHS of the general-xi zero-bias equation: a1 (1 - a1) / a2^2 as a function
// of the stereotype share eta.
double zero_bias_lhs(double beta, double u, double eta) {
  double a1 = 1.0 - beta * eta - 2.0 * (1.0 - eta) * u;
  double one_minus_a1 = beta * eta + 2.0 * (1.0 - eta) * u;
  double a2 = beta * eta;
  return a1 * one_minus_a1 / (a2 * a2);
}

double bias_at_share(const BehaviorParams& bp, const PriorSpec& pr, double eta) {
  Loadings l = election_loadings(bp, StateShares{eta, 1.0 - eta});
  return election_bias(l, posterior_loadings(l, pr), pr);
}

}  // namespace

ZeroBiasResult zero_bias_time(const BehaviorParams& bp, const PriorSpec& pr,
                              double lambda) {
  validate(bp);
  validate(pr);
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (pr.mu_p != pr.mu_s)
    throw std::invalid_argument("zero_bias_time requires mu_p == mu_s");
  if (!(pr.sigma_p > 0.0))
    throw std::invalid_argument("zero_bias_time requires sigma_p > 0");

  using Status = ZeroBiasResult::Status;

  if (bp.beta == 0.0) {
    // a2 = 0 at every t; the outcome already loads only on p at t = 0.
    return ZeroBiasResult{Status::Found, 0.0, bias_at_share(bp, pr, 1.0)};
  }

  double vx = pr.sigma_p * pr.sigma_p;
  double vy = pr.sigma_s * pr.sigma_s;

  if (bp.xi == 1.0) {
    double arg = vx / (bp.beta * (vx + vy));
    // boundary equality (1-beta)/beta == sigma_s^2/sigma_p^2 maps to t* = 0;
    // tolerate the rounding of arg across 1 when variances come from squares
    if (arg > 1.0 + 1e-12) return ZeroBiasResult{Status::NoSolution};
    double t_star = arg >= 1.0 ? 0.0 : -std::log(arg) / lambda;
    if (t_star == 0.0) t_star = 0.0;  // normalize -0
    double residual = bias_at_share(bp, pr, std::exp(-lambda * t_star));
    return ZeroBiasResult{Status::Found, t_star, residual};
  }

  // General xi: scan eta downward from 1 for a sign change of
  // a1(1-a1)/a2^2 - vy/vx, then bisect. The proof's monotonicity claim is
  // tentative, so the scan does not assume it.
  double ratio = vy / vx;
  double u = 1.0 - bp.xi;
  auto phi = [&](double eta) { return zero_bias_lhs(bp.beta, u, eta) - ratio; };

  const int kScan = 1024;
  const double eta_min = 1e-9;
  double hi = 1.0, f_hi = phi(1.0);
  if (f_hi >= 0.0) {
    // at or past the t = 0 boundary; accept when the bias is already zero
    double residual = bias_at_share(bp, pr, 1.0);
    if (residual <= 1e-10) return ZeroBiasResult{Status::Found, 0.0, residual};
    if (f_hi == 0.0) return ZeroBiasResult{Status::NoConvergence, 0.0, residual};
  }
  double lo = 0.0, f_lo = 0.0;
  bool bracketed = false;
  for (int k = 1; k <= kScan; ++k) {
    double eta = 1.0 - (1.0 - eta_min) * double(k) / double(kScan);
    double f = phi(eta);
    if (f == 0.0 || (f_hi < 0.0) != (f < 0.0)) {
      lo = eta;
      f_lo = f;
      bracketed = true;
      break;
    }
    hi = eta;
    f_hi = f;
  }
  if (!bracketed) return ZeroBiasResult{Status::NoSolution};

  // bisect on [lo, hi] (phi changes sign across it)
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    double mid = 0.5 * (lo + hi);
    double f = phi(mid);
    if (f == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((f < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f;
    } else {
      hi = mid;
    }
  }
  double eta_star = 0.5 * (lo + hi);
  double t_star = -std::log(eta_star) / lambda;
  if (t_star == 0.0) t_star = 0.0;
  double residual = bias_at_share(bp, pr, eta_star);
  if (residual <= 1e-10) return ZeroBiasResult{Status::Found, t_star, residual};
  return ZeroBiasResult{Status::NoConvergence, t_star, residual};
}

std::vector<WelfareReport> welfare_curve(const BehaviorParams& bp,
                                         const PriorSpec& pr,
                                         const ProcessParams& proc,
                                         std::span<const double> t_grid) {
  if (t_grid.empty()) throw std::invalid_argument("t grid must be nonempty");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw std::invalid_argument("t grid must be strictly ascending");

  std::vector<WelfareReport> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    StateShares sh = share_stereotype(proc, t);
    Loadings l = election_loadings(bp, sh);
    PosteriorLoadings g = posterior_loadings(l, pr);
    double wp = welfare_positive(l, pr);
    double b = election_bias(l, g, pr);
    // w_i computed by its own closed form; the decomposition w_i = w_p - b
    // is a tested invariant, not a definition.
    out.push_back(WelfareReport{t, sh.eta_s, wp, welfare_institutional(l, pr), b});
  }
  return out;
}

}  // namespace ctsim
