#include "ctsim/three_state.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ctsim/csv.hpp"
#include "ctsim/stats.hpp"

namespace ctsim {

void validate(const ChainParams& cp) {
  if (!(cp.lambda1 > 0.0) || !(cp.lambda2 > 0.0))
    throw std::invalid_argument("chain intensities must be > 0");
}

ChainShares chain_shares(const ChainParams& cp, double t) {
  validate(cp);
  if (!(t >= 0.0)) throw std::invalid_argument("t must be >= 0");
  double mu_s = std::exp(-cp.lambda1 * t);
  double delta = cp.lambda2 - cp.lambda1;
  double mu_a;
  if (std::abs(delta) < 1e-12 * cp.lambda1) {
    mu_a = cp.lambda1 * t * mu_s;
  } else {
    // -expm1(-delta t)/delta stays accurate across the lambda1 == lambda2 seam
    mu_a = cp.lambda1 * mu_s * (-std::expm1(-delta * t)) / delta;
  }
  double mu_t = 1.0 - mu_s - mu_a;
  if (mu_t < 0.0 && mu_t > -1e-12) mu_t = 0.0;
  return ChainShares{mu_s, mu_a, mu_t};
}

Loadings election_loadings_3(const BehaviorParams& bp, const ChainShares& cs) {
  validate(bp);
  double u = 1.0 - bp.xi;
  double a0 = cs.mu_a * u;
  double a2 = bp.beta * cs.mu_s;
  double a1 = 1.0 - a2 - 2.0 * a0;
  return Loadings{a0, a1, a2};
}

Loadings election_loadings_3_abstention(double beta, const ChainShares& cs) {
  double voters = cs.mu_s + cs.mu_t;
  if (!(voters > 0.0))
    throw std::invalid_argument("abstention loadings undefined: nobody votes");
  double ws = cs.mu_s / voters;
  double a2 = beta * ws;
  return Loadings{0.0, 1.0 - a2, a2};
}

IdentificationEstimates identify_from_panel(std::span<const PanelRecord> panel) {
  CellStat s1, s0, a1c, a0c;
  std::int64_t n_y = 0;
  double sum_y = 0.0;
  double sum_s1 = 0.0, sum_s0 = 0.0, sum_a1 = 0.0, sum_a0 = 0.0;

  for (const PanelRecord& r : panel) {
    if (!r.stable_pref) continue;
    ++n_y;
    sum_y += *r.stable_pref;
    if (r.ex_post_state != 'T') continue;
    if (r.ex_ante_state == 'S') {
      if (*r.stable_pref == 1) { ++s1.n; sum_s1 += r.ex_ante_report; }
      else { ++s0.n; sum_s0 += r.ex_ante_report; }
    } else if (r.ex_ante_state == 'A') {
      if (*r.stable_pref == 1) { ++a1c.n; sum_a1 += r.ex_ante_report; }
      else { ++a0c.n; sum_a0 += r.ex_ante_report; }
    }
  }

  auto require_cell = [](std::int64_t n, const char* name) {
    if (n == 0)
      throw EstimationError(EstimationError::Kind::EmptyCell,
                            std::string("empty conditioning cell: ") + name);
  };
  require_cell(s1.n, "S->T with y=1");
  require_cell(s0.n, "S->T with y=0");
  require_cell(a1c.n, "A->T with y=1");
  require_cell(a0c.n, "A->T with y=0");
  require_cell(n_y, "observed stable preferences");

  s1.mean = sum_s1 / double(s1.n);
  s0.mean = sum_s0 / double(s0.n);
  a1c.mean = sum_a1 / double(a1c.n);
  a0c.mean = sum_a0 / double(a0c.n);

  IdentificationEstimates out{};
  out.s1 = s1;
  out.s0 = s0;
  out.a1 = a1c;
  out.a0 = a0c;
  out.n_y = n_y;
  out.beta_hat = 1.0 - (s1.mean - s0.mean);
  out.p_hat = sum_y / double(n_y);
  out.xi_hat_1 = a1c.mean;
  out.xi_hat_0 = 1.0 - a0c.mean;

  double v1 = s1.mean * (1.0 - s1.mean) / double(s1.n);
  double v0 = s0.mean * (1.0 - s0.mean) / double(s0.n);
  out.beta_se = std::sqrt(v1 + v0);
  out.p_se = std::sqrt(out.p_hat * (1.0 - out.p_hat) / double(n_y));
  out.xi1_se = std::sqrt(a1c.mean * (1.0 - a1c.mean) / double(a1c.n));
  out.xi0_se = std::sqrt(a0c.mean * (1.0 - a0c.mean) / double(a0c.n));

  if (out.beta_hat != 0.0) {
    double ps = s0.mean / out.beta_hat;
    out.p_s_hat = ps;
    // delta method on p_s = x0 / (1 - x1 + x0), independent cells
    double d_x1 = ps / out.beta_hat;
    double d_x0 = 1.0 / out.beta_hat + ps / out.beta_hat;
    out.p_s_se = std::sqrt(d_x1 * d_x1 * v1 + d_x0 * d_x0 * v0);
  }
  return out;
}

SymmetryTest symmetry_test(double xi_hat_1, std::int64_t n1, double xi_hat_0,
                           std::int64_t n0) {
  if (n1 <= 0 || n0 <= 0)
    throw EstimationError(EstimationError::Kind::EmptyCell,
                          "symmetry test needs both A->T cells nonempty");
  double diff = xi_hat_1 - xi_hat_0;
  double se = std::sqrt(xi_hat_1 * (1.0 - xi_hat_1) / double(n1) +
                        xi_hat_0 * (1.0 - xi_hat_0) / double(n0));
  double z = diff == 0.0 ? 0.0 : diff / se;
  return SymmetryTest{diff, z, stats::p_two_sided(z), n1 < 30 || n0 < 30, n1, n0};
}

std::vector<PanelRecord> read_panel_csv(const std::string& path) {
  csv::Table table = csv::read_file(path);
  int c_id = table.column("subject_id");
  int c_rep = table.column("ex_ante_report");
  int c_pre = table.column("ex_ante_state");
  int c_post = table.column("ex_post_state");
  int c_y = table.column("stable_pref");

  std::vector<PanelRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    PanelRecord r;
    r.subject_id = row[c_id];
    r.ex_ante_report = csv::to_int(row[c_rep], table.line_of(i), "ex_ante_report");
    if (r.ex_ante_report != 0 && r.ex_ante_report != 1)
      throw csv::ParseError(table.line_of(i), "ex_ante_report must be 0 or 1");
    auto state_of = [&](const std::string& s, const char* field, bool allow_t) {
      if (s == "S") return 'S';
      if (s == "A") return 'A';
      if (allow_t && s == "T") return 'T';
      throw csv::ParseError(table.line_of(i), std::string(field) + " must be " +
                                                  (allow_t ? "S, A or T" : "S or A"));
    };
    r.ex_ante_state = state_of(row[c_pre], "ex_ante_state", false);
    r.ex_post_state = state_of(row[c_post], "ex_post_state", true);
    if (!row[c_y].empty()) {
      int y = csv::to_int(row[c_y], table.line_of(i), "stable_pref");
      if (y != 0 && y != 1)
        throw csv::ParseError(table.line_of(i), "stable_pref must be 0, 1 or empty");
      r.stable_pref = y;
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace ctsim
