#pragma once

// S -> A -> T chain extension: linear-chain occupation shares, the matching
// election loadings, and the identification estimators for (beta, p_S, xi_A)
// from panel transitions.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctsim/model.hpp"

namespace ctsim {

struct ChainParams {
  double lambda1;  // S->A intensity, > 0
  double lambda2;  // A->T intensity, > 0
};

struct ChainShares {
  double mu_s;
  double mu_a;
  double mu_t;
};

void validate(const ChainParams& cp);

// mu_s = e^{-l1 t}; mu_a = l1/(l2-l1) (e^{-l1 t} - e^{-l2 t}) with the
// analytic l1 == l2 limit l1 t e^{-l1 t}; mu_t closes the sum to 1.
ChainShares chain_shares(const ChainParams& cp, double t);

// a0 = mu_a (1-xi_A), a1 = 1 - beta mu_s - 2 mu_a (1-xi_A), a2 = beta mu_s.
// bp.xi plays the role of xi_A.
Loadings election_loadings_3(const BehaviorParams& bp, const ChainShares& cs);

// Opt-in variant where A agents abstain and p_bar renormalizes over voters.
// Excluded from closed-form comparisons.
Loadings election_loadings_3_abstention(double beta, const ChainShares& cs);

struct PanelRecord {
  std::string subject_id;
  int ex_ante_report;              // 0/1
  char ex_ante_state;              // 'S' or 'A'
  char ex_post_state;              // 'S', 'A' or 'T'
  std::optional<int> stable_pref;  // observed only once the subject reaches T
  int cognitive_tag = 0;           // inert
};

class EstimationError : public std::runtime_error {
 public:
  enum class Kind { EmptyCell, ZeroBeta };
  EstimationError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct CellStat {
  double mean = 0.0;
  std::int64_t n = 0;
};

struct IdentificationEstimates {
  double beta_hat;
  std::optional<double> p_s_hat;  // undefined-by-rule when beta_hat == 0
  double p_hat;                   // mean stable preference
  double xi_hat_1;                // x-bar of A->T transitioners with y = 1
  double xi_hat_0;                // 1 - x-bar of A->T transitioners with y = 0
  CellStat s1, s0;                // S->T cells conditioned on y
  CellStat a1, a0;                // A->T cells conditioned on y
  std::int64_t n_y = 0;           // subjects with observed stable preference
  double beta_se;
  std::optional<double> p_s_se;   // delta method
  double p_se;
  double xi1_se, xi0_se;
};

// Identification estimators from a panel of (ex-ante report, state path,
// final stable preference). Throws EstimationError{EmptyCell} when a
// conditioning cell is empty; beta_hat == 0 leaves p_s_hat unset instead of
// dividing.
IdentificationEstimates identify_from_panel(std::span<const PanelRecord> panel);

struct SymmetryTest {
  double diff;
  double z;
  double p_value;
  bool low_power;  // flagged when either cell is tiny
  std::int64_t n1, n0;
};

// Two-proportion z test of xi_hat_1 against 1 - x-bar_{A|0}.
SymmetryTest symmetry_test(double xi_hat_1, std::int64_t n1, double xi_hat_0,
                           std::int64_t n0);

std::vector<PanelRecord> read_panel_csv(const std::string& path);

}  // namespace ctsim
