#pragma once

// Monte Carlo engine. Two modes: LinearGaussian draws the shares from the
// untruncated normal priors and applies the affine outcome/posterior maps
// (exactly the closed-form abstraction); Microfounded additionally samples a
// finite population of agents and aggregates their Bernoulli reports.
//
// Determinism contract: a given McConfig (seed included) produces
// bit-identical results for any thread count and for the scalar and AVX2
// backends. Replication randomness is counter-derived from (seed, rep),
// per-replication values are reduced by a fixed pairwise tree, and kernels
// of both backends execute identical IEEE op sequences.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ctsim/analytics.hpp"
#include "ctsim/model.hpp"

namespace ctsim::mc {

enum class Mode { LinearGaussian, Microfounded };
enum class Target { WP, WI, Bias, PbarMean };
enum class Backend { Auto, Scalar, Avx2 };

const char* to_string(Target t);
const char* to_string(Backend b);
Backend backend_from_string(const std::string& s);

struct McConfig {
  Mode mode = Mode::LinearGaussian;
  std::uint64_t replications = 100000;
  std::uint64_t agents = 1;  // Microfounded only
  double t = 1.0;
  std::uint64_t seed = 1;
  BehaviorParams bp{0.5, 1.0};
  ProcessParams proc{1.0, 0.0};
  PriorSpec priors{0.5, 0.2, 0.5, 0.2};
  Backend backend = Backend::Auto;
  int threads = 1;
};

void validate(const McConfig& cfg);

struct McReport {
  Target target;
  double estimate;
  double std_error;            // sample std dev / sqrt(replications)
  std::uint64_t clamp_events;  // Microfounded diagnostics
};

struct ReplicationRecord {
  double p, p_s, p_bar, p_hat;
};

struct CellSummary {
  double wp_mean, wp_se;
  double wi_mean, wi_se;
  double bias_mean, bias_se;
  double pbar_mean, pbar_se;
  std::uint64_t clamp_events;
};

struct CompareRow {
  double beta, xi, eta_s;
  Target target;
  double closed;
  double mc;
  double std_error;
  double z;           // (mc - closed)/se; 0 for exact matches
  bool exact;         // se == 0 and mc == closed
  bool flagged;       // |z| > 4, or se == 0 with mc != closed
};

struct CompareGrid {
  std::vector<double> betas;
  std::vector<double> xis;
  std::vector<double> eta_ss;
};

// One replication, primarily a test/inspection hook; the batched paths
// compute exactly these values.
ReplicationRecord simulate_replication(const McConfig& cfg, std::uint64_t rep_index);

CellSummary run_cell(const McConfig& cfg);

McReport estimate_welfare_mc(const McConfig& cfg, Target target);

// LinearGaussian-mode sweep over (beta, xi, eta_s) cells at the config's
// priors; loadings are built directly from each cell's eta_s. `corrupt`
// perturbs the closed forms and exists as a negative-control test hook.
std::vector<CompareRow> compare_mc_closed_form(const McConfig& cfg,
                                               const CompareGrid& grid,
                                               bool corrupt = false);

// Backend actually selected under `b` on this machine.
Backend resolved_backend(Backend b);
bool avx2_available();

// State-assignment uniform used by the microfounded kernels; exposed so the
// irreversibility property (an agent aware at t1 stays aware at t2 > t1) is
// testable against the exact kernel rule.
double agent_state_uniform(std::uint64_t seed, std::uint64_t rep, std::uint64_t agent);

// Fixed-tree pairwise sum; deterministic for a given length, independent of
// threading or lane width.
double pairwise_sum(std::span<const double> xs);

}  // namespace ctsim::mc
