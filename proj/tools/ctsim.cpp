// ctsim - command-line surface of the critical-thinking voting library.
// Subcommands: welfare, regime, zerobias, simulate, classify, estimate,
// sweep, chain. All numeric CSV fields use 12 significant digits so outputs
// are byte-stable; no command writes a partial output file.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ctsim/analytics.hpp"
#include "ctsim/config.hpp"
#include "ctsim/csv.hpp"
#include "ctsim/format.hpp"
#include "ctsim/inference.hpp"
#include "ctsim/mc.hpp"
#include "ctsim/model.hpp"
#include "ctsim/stats.hpp"
#include "ctsim/three_state.hpp"

namespace {

using namespace ctsim;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;

void require_readable(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
}

// Outputs are buffered and written in one shot.
void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-")
    std::cout << content;
  else
    write_file(path, content);
}

std::vector<double> time_grid(double t_max, int steps) {
  if (steps < 1) throw std::invalid_argument("--steps must be >= 1");
  if (!(t_max >= 0.0)) throw std::invalid_argument("--t-max must be >= 0");
  std::vector<double> grid;
  if (steps == 1) {
    grid.push_back(0.0);
  } else {
    for (int i = 0; i < steps; ++i)
      grid.push_back(t_max * double(i) / double(steps - 1));
  }
  return grid;
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": bad integer '" + item + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty list");
  return out;
}

void warn_priors(const PriorSpec& pr) {
  if (!priors_well_inside_unit(pr))
    std::cerr << "warning: a prior puts mass outside [0,1] (mu +/- 3 sigma); "
                 "the Gaussian abstraction assumes small sigma\n";
}

stats::StarLegend legend_from(const std::string& name) {
  if (name == "loose") return stats::kLegendLoose;
  if (name == "strict") return stats::kLegendStrict;
  throw std::invalid_argument("--legend must be 'loose' or 'strict'");
}

// ---- welfare ------------------------------------------------------------

int cmd_welfare(const BehaviorParams& bp, const ProcessParams& proc,
                const PriorSpec& pr, double t_max, int steps,
                const std::string& out) {
  warn_priors(pr);
  std::vector<double> grid = time_grid(t_max, steps);
  auto curve = welfare_curve(bp, pr, proc, grid);
  std::string csv = "t,eta_s,w_p,w_i,bias\n";
  for (const WelfareReport& r : curve)
    csv += fmt::sig12(r.t) + "," + fmt::sig12(r.eta_s) + "," + fmt::sig12(r.w_p) +
           "," + fmt::sig12(r.w_i) + "," + fmt::sig12(r.bias) + "\n";
  emit(out, csv);
  return kExitOk;
}

// ---- regime / zerobias ----------------------------------------------------

int cmd_regime(const BehaviorParams& bp, double mu, double sigma, double lambda) {
  PriorSpec pr{mu, sigma, mu, sigma};
  RegimeResult r = classify_regime(bp, pr, lambda);
  std::string line = std::string("regime=") + to_string(r.regime) +
                     " threshold_eta=" + fmt::sig12(r.threshold_eta);
  if (r.t_max) line += " t_max=" + fmt::sig12(*r.t_max);
  std::cout << line << "\n";
  return kExitOk;
}

int cmd_regime_numeric(const BehaviorParams& bp, const PriorSpec& pr,
                       double lambda, double t_hi) {
  NumericRegimeProfile prof = classify_regime_numeric(bp, pr, lambda, t_hi);
  const char* pat = "?";
  switch (prof.pattern) {
    case NumericRegimeProfile::Pattern::NonDecreasing: pat = "NonDecreasing"; break;
    case NumericRegimeProfile::Pattern::NonIncreasing: pat = "NonIncreasing"; break;
    case NumericRegimeProfile::Pattern::IncreaseThenDecrease:
      pat = "IncreaseThenDecrease";
      break;
    case NumericRegimeProfile::Pattern::DecreaseThenIncrease:
      pat = "DecreaseThenIncrease";
      break;
    case NumericRegimeProfile::Pattern::Mixed: pat = "Mixed"; break;
  }
  std::cout << "regime(" << prof.label << ")=" << pat;
  if (prof.t_turn) std::cout << " t_turn~" << fmt::sig12(*prof.t_turn);
  std::cout << "\n";
  return kExitOk;
}

int cmd_zerobias(const BehaviorParams& bp, double mu, double sigma_p,
                 double sigma_s, double lambda) {
  PriorSpec pr{mu, sigma_p, mu, sigma_s};
  ZeroBiasResult r = zero_bias_time(bp, pr, lambda);
  switch (r.status) {
    case ZeroBiasResult::Status::Found:
      std::cout << "t* = " << fmt::sig12(r.t_star)
                << " (residual bias " << fmt::sig12(r.residual_bias) << ")\n";
      return kExitOk;
    case ZeroBiasResult::Status::NoSolution:
      std::cout << "none: condition violated ((1-beta)/beta exceeds "
                   "sigma_s^2/sigma_p^2; bias never vanishes)\n";
      return kExitOk;
    case ZeroBiasResult::Status::NoConvergence:
      std::cout << "no-convergence: loadings match at t = " << fmt::sig12(r.t_star)
                << " but residual bias " << fmt::sig12(r.residual_bias)
                << " exceeds 1e-10\n";
      return kExitOk;
  }
  return kExitOk;
}

// ---- simulate -------------------------------------------------------------

int cmd_simulate(const std::string& config_path, std::string out, int threads_flag,
                 const std::string& backend_flag, bool corrupt) {
  require_readable(config_path);
  io::RunConfig cfg = io::load_config(config_path);
  io::apply_env_seed(cfg);
  if (threads_flag > 0) cfg.threads = threads_flag;
  if (!backend_flag.empty()) cfg.backend = mc::backend_from_string(backend_flag);
  if (out.empty()) out = cfg.out;

  auto rows = mc::compare_mc_closed_form(cfg.mc_config(), cfg.grid, corrupt);

  std::string csv = "beta,xi,eta_s,target,closed,mc,std_error,z,note\n";
  std::size_t flagged = 0;
  for (const mc::CompareRow& r : rows) {
    if (r.flagged) ++flagged;
    csv += fmt::sig12(r.beta) + "," + fmt::sig12(r.xi) + "," + fmt::sig12(r.eta_s) +
           "," + mc::to_string(r.target) + "," + fmt::sig12(r.closed) + "," +
           fmt::sig12(r.mc) + "," + fmt::sig12(r.std_error) + "," +
           fmt::sig12(r.z) + ",";
    csv += r.exact ? "exact" : (r.flagged ? "FLAG" : "");
    csv += "\n";
  }
  emit(out, csv);
  std::cerr << "cells=" << rows.size() / 3 << " rows=" << rows.size()
            << " flagged=" << flagged
            << " backend=" << mc::to_string(mc::resolved_backend(cfg.backend))
            << " seed=" << cfg.seed << "\n";
  if (flagged > 0) {
    std::cerr << "error: " << flagged << " cell(s) deviate from the closed form "
              << "by more than 4 standard errors\n";
    return kExitValidation;
  }
  return kExitOk;
}

// ---- classification pipeline ----------------------------------------------

std::string table_csv(const inference::TransitionTable& tt) {
  std::string csv = "treatment,s_to_s,s_to_a,a_to_a,s_to_t,a_to_t,t_to_t\n";
  for (const auto& [name, c] : tt.by_treatment)
    csv += name + "," + std::to_string(c.s_to_s) + "," + std::to_string(c.s_to_a) +
           "," + std::to_string(c.a_to_a) + "," + std::to_string(c.s_to_t) + "," +
           std::to_string(c.a_to_t) + "," + std::to_string(c.t_to_t) + "\n";
  return csv;
}

int audit_or_fail(const inference::TransitionTable& tt) {
  auto violations = inference::irreversibility_violations(tt);
  if (violations.empty()) return kExitOk;
  std::cerr << "error: irreversibility audit failed (backward transitions):\n";
  for (const auto& v : violations) std::cerr << "  " << v << "\n";
  return kExitValidation;
}

int cmd_classify(const std::string& subjects_path,
                 const inference::ClassificationThresholds& th,
                 const std::string& out) {
  require_readable(subjects_path);
  auto records = inference::read_subjects_csv(subjects_path);
  if (records.empty()) {
    std::cerr << "warning: no subject rows; emitting empty table\n";
    emit(out, table_csv(inference::TransitionTable{}));
    return kExitOk;
  }
  inference::TransitionTable tt;
  try {
    tt = inference::transition_table(records, th);
  } catch (const inference::IrreversibilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    // data problems (e.g. a subject without grades), not flag problems
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  emit(out, table_csv(tt));
  return kExitOk;
}

std::string matrix_pretty(const std::vector<inference::PairTest>& tests,
                          const std::vector<std::string>& names,
                          const stats::StarLegend& legend) {
  auto find = [&](const std::string& a, const std::string& b)
      -> const inference::PairTest* {
    for (const auto& t : tests)
      if (t.lhs == a && t.rhs == b) return &t;
    return nullptr;
  };
  std::ostringstream os;
  os << "t-ratio difference-in-means\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-18s", "treatment");
  os << buf;
  for (const auto& n : names) {
    std::snprintf(buf, sizeof buf, "%14s", n.c_str());
    os << buf;
  }
  os << "\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%-18s", names[i].c_str());
    os << buf;
    for (std::size_t j = 0; j < names.size(); ++j) {
      std::string cell = ".";
      if (j > i) {
        const inference::PairTest* t = find(names[i], names[j]);
        if (t)
          cell = fmt::fixed(t->test.t_ratio, 3) +
                 stats::stars(t->test.p_value, legend);
      }
      std::snprintf(buf, sizeof buf, "%14s", cell.c_str());
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

int cmd_estimate(const std::string& counts_path, const std::string& subjects_path,
                 const inference::ClassificationThresholds& th,
                 const std::string& legend_name, bool pooled, double exposure,
                 const std::string& out_lambda, const std::string& out_matrix) {
  inference::TransitionTable tt;
  if (!counts_path.empty()) {
    require_readable(counts_path);
    tt = inference::read_counts_json(counts_path);
  } else {
    require_readable(subjects_path);
    auto records = inference::read_subjects_csv(subjects_path);
    if (records.empty()) {
      std::cerr << "warning: no subject rows; nothing to estimate\n";
      return kExitOk;
    }
    try {
      tt = inference::transition_table(records, th);
    } catch (const inference::IrreversibilityError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitValidation;
    }
  }
  if (int rc = audit_or_fail(tt); rc != kExitOk) return rc;

  stats::StarLegend legend = legend_from(legend_name);
  auto names = inference::treatments_in(tt);

  // build every report before emitting anything: no partial output on failure
  std::string lcsv = "treatment,freq,n,se,intensity\n";
  for (const auto& name : names) {
    auto est = inference::estimate_lambda_hat(tt, name);
    double intensity = inference::frequency_to_intensity(est.freq, exposure);
    lcsv += name + "," + fmt::sig12(est.freq) + "," + std::to_string(est.n) + "," +
            fmt::sig12(est.se) + "," + fmt::sig12(intensity) + "\n";
  }

  std::vector<inference::PairTest> tests;
  std::string mcsv;
  if (names.size() >= 2) {
    tests = inference::pairwise_tests(tt, names, pooled);
    mcsv = "treatment_1,treatment_2,diff,se,t_ratio,p_value,stars\n";
    for (const auto& t : tests)
      mcsv += t.lhs + "," + t.rhs + "," + fmt::sig12(t.test.diff) + "," +
              fmt::sig12(t.test.se) + "," + fmt::sig12(t.test.t_ratio) + "," +
              fmt::sig12(t.test.p_value) + "," + stats::stars(t.test.p_value, legend) +
              "\n";
  }

  emit(out_lambda, lcsv);
  if (!tests.empty()) {
    emit(out_matrix, mcsv);
    std::cerr << matrix_pretty(tests, names, legend);
  } else {
    std::cerr << "note: fewer than two treatments; skipping pairwise tests\n";
  }
  return kExitOk;
}

int cmd_sweep(const std::string& subjects_path, const std::string& kts_list,
              const std::string& rc_list,
              const inference::ClassificationThresholds& base,
              const std::string& legend_name, const std::string& out) {
  require_readable(subjects_path);
  auto records = inference::read_subjects_csv(subjects_path);
  std::vector<int> kts = parse_int_list(kts_list, "--kts");
  std::vector<int> rc = parse_int_list(rc_list, "--rc");
  std::vector<inference::ReasonRule> rules;
  // rc = required count on the second side; one reason on the first side
  for (int c : rc) rules.push_back(inference::ReasonRule{1, 1 + c});

  auto cells = inference::threshold_sweep(records, kts, rules, base.grade_mode,
                                          base.strict);
  stats::StarLegend legend = legend_from(legend_name);
  std::string csv =
      "tau_kts,min_per_side,total,treatment_1,treatment_2,diff,se,t_ratio,"
      "p_value,stars\n";
  for (const auto& cell : cells)
    for (const auto& t : cell.tests)
      csv += std::to_string(cell.tau_kts) + "," +
             std::to_string(cell.reason_rule.min_per_side) + "," +
             std::to_string(cell.reason_rule.total) + "," + t.lhs + "," + t.rhs +
             "," + fmt::sig12(t.test.diff) + "," + fmt::sig12(t.test.se) + "," +
             fmt::sig12(t.test.t_ratio) + "," + fmt::sig12(t.test.p_value) + "," +
             stats::stars(t.test.p_value, legend) + "\n";
  emit(out, csv);
  return kExitOk;
}

// ---- chain ---------------------------------------------------------------

int cmd_chain_curve(const ChainParams& cp, double beta, double xi_a,
                    const PriorSpec& pr, bool abstention, double t_max, int steps,
                    const std::string& out) {
  warn_priors(pr);
  BehaviorParams bp{beta, xi_a};
  std::string csv = "t,mu_s,mu_a,mu_t,a0,a1,a2,w_p,w_i,bias\n";
  for (double t : time_grid(t_max, steps)) {
    ChainShares cs = chain_shares(cp, t);
    Loadings l = abstention ? election_loadings_3_abstention(beta, cs)
                            : election_loadings_3(bp, cs);
    PosteriorLoadings g = posterior_loadings(l, pr);
    double wp = welfare_positive(l, pr);
    double b = election_bias(l, g, pr);
    csv += fmt::sig12(t) + "," + fmt::sig12(cs.mu_s) + "," + fmt::sig12(cs.mu_a) +
           "," + fmt::sig12(cs.mu_t) + "," + fmt::sig12(l.a0) + "," +
           fmt::sig12(l.a1) + "," + fmt::sig12(l.a2) + "," + fmt::sig12(wp) + "," +
           fmt::sig12(welfare_institutional(l, pr)) + "," + fmt::sig12(b) + "\n";
  }
  emit(out, csv);
  return kExitOk;
}

int cmd_chain_identify(const std::string& panel_path, const std::string& out) {
  require_readable(panel_path);
  auto panel = read_panel_csv(panel_path);
  IdentificationEstimates est;
  try {
    est = identify_from_panel(panel);
  } catch (const EstimationError& e) {
    std::cerr << "error: estimation failed ("
              << (e.kind() == EstimationError::Kind::EmptyCell ? "empty cell"
                                                               : "beta_hat = 0")
              << "): " << e.what() << "\n";
    return kExitValidation;
  }
  std::ostringstream os;
  os << "beta_hat = " << fmt::sig12(est.beta_hat) << " (se "
     << fmt::sig12(est.beta_se) << ")\n";
  if (est.p_s_hat)
    os << "p_s_hat  = " << fmt::sig12(*est.p_s_hat) << " (se "
       << fmt::sig12(est.p_s_se.value_or(0.0)) << ")\n";
  else
    os << "p_s_hat  = undefined (beta_hat = 0: stereotypes always report y)\n";
  os << "p_hat    = " << fmt::sig12(est.p_hat) << " (se " << fmt::sig12(est.p_se)
     << ")\n";
  os << "xi_hat_1 = " << fmt::sig12(est.xi_hat_1) << " (n " << est.a1.n << ")\n";
  os << "xi_hat_0 = " << fmt::sig12(est.xi_hat_0) << " (n " << est.a0.n << ")\n";
  auto sym = symmetry_test(est.xi_hat_1, est.a1.n, est.xi_hat_0, est.a0.n);
  os << "symmetry: z = " << fmt::sig12(sym.z) << ", p = " << fmt::sig12(sym.p_value);
  if (sym.low_power) os << " [almost no power: tiny A->T cells]";
  os << "\n";
  std::cout << os.str();
  if (!out.empty()) {
    std::string csv =
        "beta_hat,beta_se,p_s_hat,p_s_se,p_hat,p_se,xi_hat_1,xi_hat_0,sym_z,sym_p,"
        "low_power\n";
    csv += fmt::sig12(est.beta_hat) + "," + fmt::sig12(est.beta_se) + ",";
    csv += est.p_s_hat ? fmt::sig12(*est.p_s_hat) : "";
    csv += ",";
    csv += est.p_s_se ? fmt::sig12(*est.p_s_se) : "";
    csv += "," + fmt::sig12(est.p_hat) + "," + fmt::sig12(est.p_se) + "," +
           fmt::sig12(est.xi_hat_1) + "," + fmt::sig12(est.xi_hat_0) + "," +
           fmt::sig12(sym.z) + "," + fmt::sig12(sym.p_value) + "," +
           (sym.low_power ? "1" : "0") + "\n";
    write_file(out, csv);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critical-thinking voting model: analytics, simulation and "
               "empirical pipeline"};
  app.require_subcommand(1);

  // shared option storage
  BehaviorParams bp{0.5, 1.0};
  ProcessParams proc{1.0, 0.0};
  PriorSpec pr{0.5, 0.2, 0.5, 0.2};
  double t_max = 5.0, mu = 0.5, sigma = 0.2;
  double sigma_p = 0.2, sigma_s = 0.2, exposure = 1.0, t_hi = 10.0;
  int steps = 101, threads = 0;
  std::string out, config_path, backend, subjects, counts, panel;
  std::string legend = "loose", kts_list = "6,7,8", rc_list = "2,3";
  bool corrupt = false, pooled = false, strict = false, numeric = false;
  bool abstention = false;
  std::string grade_mode = "majority";
  int tau_kts = 7, min_per_side = 1, total = 3;
  ChainParams cp{1.0, 1.0};
  double beta3 = 0.5, xi_a = 1.0;

  auto add_model_flags = [&](CLI::App* cmd) {
    cmd->add_option("--beta", bp.beta, "weight on the stereotype draw")->required();
    cmd->add_option("--xi", bp.xi, "accuracy of the aware report")->required();
    cmd->add_option("--lambda", proc.lambda, "S->A intensity");
  };

  CLI::App* welfare = app.add_subcommand("welfare", "welfare/bias curve CSV");
  add_model_flags(welfare);
  welfare->add_option("--nu", proc.nu, "exit/re-entry intensity (0 disables)");
  welfare->add_option("--mu-p", pr.mu_p, "mean of p");
  welfare->add_option("--sigma-p", pr.sigma_p, "std dev of p");
  welfare->add_option("--mu-s", pr.mu_s, "mean of p_S");
  welfare->add_option("--sigma-s", pr.sigma_s, "std dev of p_S");
  welfare->add_option("--t-max", t_max, "last grid time");
  welfare->add_option("--steps", steps, "grid points (1 gives t=0 only)");
  welfare->add_option("--out", out, "output CSV ('-' = stdout)");

  CLI::App* regime = app.add_subcommand(
      "regime", "institutional-welfare monotonicity regime (equal moments)");
  add_model_flags(regime);
  regime->add_option("--mu", mu, "common prior mean");
  regime->add_option("--sigma", sigma, "common prior std dev");
  regime->add_flag("--numeric", numeric,
                   "numerical sign-scan profile (allows unequal moments)");
  regime->add_option("--mu-p", pr.mu_p, "mean of p (numeric mode)");
  regime->add_option("--sigma-p", pr.sigma_p, "std dev of p (numeric mode)");
  regime->add_option("--mu-s", pr.mu_s, "mean of p_S (numeric mode)");
  regime->add_option("--sigma-s", pr.sigma_s, "std dev of p_S (numeric mode)");
  regime->add_option("--t-hi", t_hi, "scan horizon (numeric mode)");

  CLI::App* zerobias = app.add_subcommand("zerobias", "zero-bias poll time");
  add_model_flags(zerobias);
  zerobias->add_option("--mu", mu, "common prior mean");
  zerobias->add_option("--sigma-p", sigma_p, "std dev of p")->required();
  zerobias->add_option("--sigma-s", sigma_s, "std dev of p_S")->required();

  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo vs closed-form comparison");
  simulate->add_option("--config", config_path, "JSON run config")->required();
  simulate->add_option("--out", out, "output CSV (overrides config io.out)");
  simulate->add_option("--threads", threads, "worker threads");
  simulate->add_option("--backend", backend, "auto|scalar|avx2");
  simulate
      ->add_flag("--corrupt-closed-form", corrupt,
                 "negative-control hook: perturb closed forms")
      ->group("");  // hidden

  auto add_pipeline_flags = [&](CLI::App* cmd) {
    cmd->add_option("--grade-mode", grade_mode, "majority|unanimity");
    cmd->add_option("--tau-kts", tau_kts, "knowledge-test threshold");
    cmd->add_option("--min-per-side", min_per_side, "reasons required per side");
    cmd->add_option("--total", total, "total reasons required");
    cmd->add_flag("--strict", strict, "strict '>' thresholds instead of '>='");
  };

  CLI::App* classify = app.add_subcommand("classify", "classify subjects, emit "
                                                      "transition table");
  classify->add_option("--subjects", subjects, "subjects CSV")->required();
  add_pipeline_flags(classify);
  classify->add_option("--out", out, "output CSV ('-' = stdout)");

  CLI::App* estimate = app.add_subcommand(
      "estimate", "lambda-hat per treatment + pairwise t-ratio matrix");
  estimate->add_option("--counts", counts, "counts JSON fixture");
  estimate->add_option("--subjects", subjects, "subjects CSV");
  add_pipeline_flags(estimate);
  estimate->add_option("--legend", legend, "star legend: loose|strict");
  estimate->add_flag("--pooled", pooled, "pooled SE (does NOT match the "
                                         "published t-ratios)");
  estimate->add_option("--exposure", exposure, "exposure time for intensity");
  estimate->add_option("--out-lambda", out, "lambda CSV ('-' = stdout)");
  std::string out_matrix;
  estimate->add_option("--out-matrix", out_matrix, "matrix CSV ('-' = stdout)");

  CLI::App* sweep = app.add_subcommand("sweep", "threshold-sensitivity sweep");
  sweep->add_option("--subjects", subjects, "subjects CSV")->required();
  sweep->add_option("--kts", kts_list, "KTS thresholds, e.g. 6,7,8");
  sweep->add_option("--rc", rc_list, "reason counter (second side), e.g. 2,3");
  add_pipeline_flags(sweep);
  sweep->add_option("--legend", legend, "star legend: loose|strict");
  sweep->add_option("--out", out, "output CSV ('-' = stdout)");

  CLI::App* chain = app.add_subcommand("chain", "three-state chain: shares "
                                                "curve or panel identification");
  chain->add_option("--lambda1", cp.lambda1, "S->A intensity");
  chain->add_option("--lambda2", cp.lambda2, "A->T intensity");
  chain->add_option("--beta", beta3, "stereotype weight");
  chain->add_option("--xi-a", xi_a, "accuracy of the A report");
  chain->add_option("--mu-p", pr.mu_p, "mean of p");
  chain->add_option("--sigma-p", pr.sigma_p, "std dev of p");
  chain->add_option("--mu-s", pr.mu_s, "mean of p_S");
  chain->add_option("--sigma-s", pr.sigma_s, "std dev of p_S");
  chain->add_option("--t-max", t_max, "last grid time");
  chain->add_option("--steps", steps, "grid points");
  chain->add_flag("--abstention", abstention,
                  "A agents abstain; p_bar renormalizes over voters");
  chain->add_option("--panel", panel, "panel CSV: identification estimators");
  chain->add_option("--out", out, "output CSV ('-' = stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    inference::ClassificationThresholds th{
        tau_kts,
        inference::ReasonRule{min_per_side, total},
        grade_mode == "unanimity" ? inference::GradeMode::Unanimity
                                  : inference::GradeMode::Majority,
        strict};
    if (grade_mode != "majority" && grade_mode != "unanimity")
      throw std::invalid_argument("--grade-mode must be majority or unanimity");
    if (tau_kts < 0 || tau_kts > 10)
      throw std::invalid_argument("--tau-kts must lie in [0,10]");
    if (min_per_side < 0 || total < 0)
      throw std::invalid_argument("reason thresholds must be >= 0");

    if (welfare->parsed())
      return cmd_welfare(bp, proc, pr, t_max, steps, out);
    if (regime->parsed()) {
      if (numeric) return cmd_regime_numeric(bp, pr, proc.lambda, t_hi);
      return cmd_regime(bp, mu, sigma, proc.lambda);
    }
    if (zerobias->parsed())
      return cmd_zerobias(bp, mu, sigma_p, sigma_s, proc.lambda);
    if (simulate->parsed())
      return cmd_simulate(config_path, out, threads, backend, corrupt);
    if (classify->parsed()) return cmd_classify(subjects, th, out);
    if (estimate->parsed()) {
      if (counts.empty() == subjects.empty())
        throw std::invalid_argument(
            "estimate needs exactly one of --counts or --subjects");
      return cmd_estimate(counts, subjects, th, legend, pooled, exposure, out,
                          out_matrix);
    }
    if (sweep->parsed())
      return cmd_sweep(subjects, kts_list, rc_list, th, legend, out);
    if (chain->parsed()) {
      if (!panel.empty()) return cmd_chain_identify(panel, out);
      return cmd_chain_curve(cp, beta3, xi_a, pr, abstention, t_max, steps, out);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const csv::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}
