#pragma once

// Empirical pipeline: classification of subjects into critical-thinking
// states before/after treatment, transition tables, transition-frequency
// estimates, pairwise difference-in-means tests, subgroup splits and
// threshold-sensitivity sweeps.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctsim/stats.hpp"

namespace ctsim::inference {

enum class Grade { Pass, Fail };
enum class GradeMode { Majority, Unanimity };
enum class PreState { S, A };

struct SubjectRecord {
  std::string subject_id;
  std::string treatment;  // newspaper, twitter, facebook, partisan_twitter
  int kts_score = 0;      // 0..10
  int familiarity = 0;    // 0/1
  int reasons_own = 0;
  int reasons_opp = 0;
  std::vector<Grade> grades;  // psychologist grades, typically 3
  std::optional<double> nfc_score;
  std::optional<double> cfs_score;
  std::optional<double> ai_grade;
  std::optional<int> internal_uncertainty;  // ordinal 0..3
};

struct ReasonRule {
  int min_per_side = 1;
  int total = 3;
};

struct ClassificationThresholds {
  int tau_kts = 7;
  ReasonRule reason_rule{};
  GradeMode grade_mode = GradeMode::Majority;
  // the published rule is stated both as strict ">" and as "at least";
  // the baseline is ">=", the strict reading is selectable
  bool strict = false;
};

struct TransitionCounts {
  std::int64_t s_to_s = 0, s_to_a = 0, s_to_t = 0;
  std::int64_t a_to_s = 0, a_to_a = 0, a_to_t = 0;
  std::int64_t t_to_s = 0, t_to_a = 0, t_to_t = 0;

  std::int64_t lambda_denominator() const { return s_to_s + s_to_a; }
};

struct TransitionTable {
  // keyed by treatment name; std::map keeps output order deterministic
  std::map<std::string, TransitionCounts> by_treatment;
};

struct LambdaEstimate {
  double freq;      // #(S->A) / (#(S->A) + #(S->S))
  std::int64_t n;   // denominator
  double se;        // binomial
};

struct TwoPropTest {
  double diff;
  double se;       // unpooled
  double t_ratio;
  double p_value;  // two-sided normal
};

struct PairTest {
  std::string lhs, rhs;
  TwoPropTest test;
};

class IrreversibilityError : public std::runtime_error {
 public:
  IrreversibilityError(std::string what, std::vector<std::string> ids)
      : std::runtime_error(std::move(what)), subject_ids(std::move(ids)) {}
  std::vector<std::string> subject_ids;
};

Grade aggregate_grades(std::span<const Grade> grades, GradeMode mode);

PreState classify_pre(const SubjectRecord& r, const ClassificationThresholds& th);
PreState classify_post(const SubjectRecord& r, const ClassificationThresholds& th);

// Cross-tab of (pre, post) per treatment. Any A->S occurrence is a pipeline
// error ("A is absorbing") and throws IrreversibilityError with the ids.
TransitionTable transition_table(std::span<const SubjectRecord> records,
                                 const ClassificationThresholds& th);

// Backward cells that must be empty: a_to_s, t_to_s, t_to_a.
// Returns the offending (treatment, cell) pairs; empty means the audit passes.
std::vector<std::string> irreversibility_violations(const TransitionTable& tt);

LambdaEstimate estimate_lambda_hat(const TransitionTable& tt,
                                   const std::string& treatment);

// Unpooled two-proportion test; this is the formula that reproduces the
// published t-ratios. The pooled variant differs and is provided for
// completeness only.
TwoPropTest two_prop_test(double f1, std::int64_t n1, double f2, std::int64_t n2);
TwoPropTest two_prop_test_pooled(double f1, std::int64_t n1, double f2,
                                 std::int64_t n2);

std::vector<PairTest> pairwise_tests(const TransitionTable& tt,
                                     std::span<const std::string> treatments,
                                     bool pooled = false);

enum class SplitMetric { NFC, CFS, AIGrade };

struct SplitCut {
  bool sample_mean = true;
  double fixed_value = 0.0;  // used when sample_mean == false
};

struct SubgroupSplit {
  std::vector<SubjectRecord> high, low;
  double cut_value;
};

SubgroupSplit subgroup_split(std::span<const SubjectRecord> records,
                             SplitMetric metric, const SplitCut& cut);

struct SweepCell {
  int tau_kts;
  ReasonRule reason_rule;
  TransitionTable table;
  std::vector<PairTest> tests;
};

std::vector<SweepCell> threshold_sweep(std::span<const SubjectRecord> records,
                                       std::span<const int> kts_grid,
                                       std::span<const ReasonRule> reason_grid,
                                       GradeMode mode, bool strict = false);

// Bridges the per-exposure transition frequency to the continuous-time
// intensity via 1 - e^{-lambda dt} = freq.
double frequency_to_intensity(double freq, double exposure);

std::vector<SubjectRecord> read_subjects_csv(const std::string& path);

// Counts fixture: {"treatments": {"newspaper": {"s_to_s": 111, ...}, ...}}.
TransitionTable read_counts_json(const std::string& path);

std::vector<std::string> treatments_in(const TransitionTable& tt);

}  // namespace ctsim::inference
