#include "ctsim/inference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ctsim/csv.hpp"
#include "json.hpp"

namespace ctsim::inference {

using nlohmann::json;

Grade aggregate_grades(std::span<const Grade> grades, GradeMode mode) {
  if (grades.empty()) throw std::invalid_argument("no grades to aggregate");
  std::size_t pass = 0;
  for (Grade g : grades)
    if (g == Grade::Pass) ++pass;
  if (mode == GradeMode::Unanimity)
    return pass == grades.size() ? Grade::Pass : Grade::Fail;
  // strictly more Pass than Fail; even-count ties resolve to Fail
  return 2 * pass > grades.size() ? Grade::Pass : Grade::Fail;
}

namespace {

bool meets(int value, int threshold, bool strict) {
  return strict ? value > threshold : value >= threshold;
}

}  // namespace

PreState classify_pre(const SubjectRecord& r, const ClassificationThresholds& th) {
  bool knowledge = meets(r.kts_score, th.tau_kts, th.strict);
  bool familiar = r.familiarity == 1;
  int per_side = std::min(r.reasons_own, r.reasons_opp);
  bool reasons = meets(per_side, th.reason_rule.min_per_side, th.strict) &&
                 meets(r.reasons_own + r.reasons_opp, th.reason_rule.total, th.strict);
  return (knowledge && familiar && reasons) ? PreState::A : PreState::S;
}

PreState classify_post(const SubjectRecord& r, const ClassificationThresholds& th) {
  if (r.grades.empty())
    throw std::invalid_argument("subject " + r.subject_id +
                                ": post-classification needs grades");
  return aggregate_grades(r.grades, th.grade_mode) == Grade::Pass ? PreState::A
                                                                  : PreState::S;
}

TransitionTable transition_table(std::span<const SubjectRecord> records,
                                 const ClassificationThresholds& th) {
  TransitionTable tt;
  std::vector<std::string> backward;
  for (const SubjectRecord& r : records) {
    PreState pre = classify_pre(r, th);
    PreState post = classify_post(r, th);
    TransitionCounts& c = tt.by_treatment[r.treatment];
    if (pre == PreState::S)
      (post == PreState::S ? c.s_to_s : c.s_to_a)++;
    else if (post == PreState::A)
      c.a_to_a++;
    else {
      c.a_to_s++;
      backward.push_back(r.subject_id);
    }
  }
  if (!backward.empty()) {
    std::string msg = "irreversibility violated: A->S transitions for subjects";
    for (const auto& id : backward) msg += " " + id;
    throw IrreversibilityError(msg, backward);
  }
  return tt;
}

std::vector<std::string> irreversibility_violations(const TransitionTable& tt) {
  std::vector<std::string> out;
  for (const auto& [name, c] : tt.by_treatment) {
    if (c.a_to_s > 0) out.push_back(name + ": a_to_s=" + std::to_string(c.a_to_s));
    if (c.t_to_s > 0) out.push_back(name + ": t_to_s=" + std::to_string(c.t_to_s));
    if (c.t_to_a > 0) out.push_back(name + ": t_to_a=" + std::to_string(c.t_to_a));
  }
  return out;
}

LambdaEstimate estimate_lambda_hat(const TransitionTable& tt,
                                   const std::string& treatment) {
  auto it = tt.by_treatment.find(treatment);
  if (it == tt.by_treatment.end())
    throw std::invalid_argument("unknown treatment: " + treatment);
  const TransitionCounts& c = it->second;
  std::int64_t n = c.lambda_denominator();
  if (n <= 0)
    throw std::invalid_argument("treatment " + treatment +
                                ": no pre-treatment S subjects");
  double f = double(c.s_to_a) / double(n);
  return LambdaEstimate{f, n, std::sqrt(f * (1.0 - f) / double(n))};
}

TwoPropTest two_prop_test(double f1, std::int64_t n1, double f2, std::int64_t n2) {
  if (n1 <= 0 || n2 <= 0) throw std::invalid_argument("cell sizes must be > 0");
  double diff = f1 - f2;
  double se = std::sqrt(f1 * (1.0 - f1) / double(n1) + f2 * (1.0 - f2) / double(n2));
  double t = diff == 0.0 ? 0.0 : diff / se;
  return TwoPropTest{diff, se, t, stats::p_two_sided(t)};
}

TwoPropTest two_prop_test_pooled(double f1, std::int64_t n1, double f2,
                                 std::int64_t n2) {
  if (n1 <= 0 || n2 <= 0) throw std::invalid_argument("cell sizes must be > 0");
  double diff = f1 - f2;
  double pool = (f1 * double(n1) + f2 * double(n2)) / double(n1 + n2);
  double se = std::sqrt(pool * (1.0 - pool) * (1.0 / double(n1) + 1.0 / double(n2)));
  double t = diff == 0.0 ? 0.0 : diff / se;
  return TwoPropTest{diff, se, t, stats::p_two_sided(t)};
}

std::vector<PairTest> pairwise_tests(const TransitionTable& tt,
                                     std::span<const std::string> treatments,
                                     bool pooled) {
  if (treatments.size() < 2)
    throw std::invalid_argument("pairwise tests need at least 2 treatments");
  std::vector<PairTest> out;
  for (std::size_t i = 0; i < treatments.size(); ++i) {
    LambdaEstimate li = estimate_lambda_hat(tt, treatments[i]);
    for (std::size_t j = i + 1; j < treatments.size(); ++j) {
      LambdaEstimate lj = estimate_lambda_hat(tt, treatments[j]);
      TwoPropTest t = pooled ? two_prop_test_pooled(li.freq, li.n, lj.freq, lj.n)
                             : two_prop_test(li.freq, li.n, lj.freq, lj.n);
      out.push_back(PairTest{treatments[i], treatments[j], t});
    }
  }
  return out;
}

SubgroupSplit subgroup_split(std::span<const SubjectRecord> records,
                             SplitMetric metric, const SplitCut& cut) {
  auto value_of = [&](const SubjectRecord& r) -> std::optional<double> {
    switch (metric) {
      case SplitMetric::NFC: return r.nfc_score;
      case SplitMetric::CFS: return r.cfs_score;
      case SplitMetric::AIGrade: return r.ai_grade;
    }
    return std::nullopt;
  };

  double cut_value = cut.fixed_value;
  if (cut.sample_mean) {
    double sum = 0.0;
    std::int64_t n = 0;
    for (const auto& r : records)
      if (auto v = value_of(r)) {
        sum += *v;
        ++n;
      }
    if (n == 0) throw std::invalid_argument("split metric missing from all records");
    cut_value = sum / double(n);
  }

  SubgroupSplit out;
  out.cut_value = cut_value;
  for (const auto& r : records) {
    auto v = value_of(r);
    if (!v) throw std::invalid_argument("subject " + r.subject_id +
                                        ": split metric missing");
    (*v >= cut_value ? out.high : out.low).push_back(r);
  }
  return out;
}

std::vector<SweepCell> threshold_sweep(std::span<const SubjectRecord> records,
                                       std::span<const int> kts_grid,
                                       std::span<const ReasonRule> reason_grid,
                                       GradeMode mode, bool strict) {
  if (kts_grid.empty() || reason_grid.empty())
    throw std::invalid_argument("sweep grids must be nonempty");
  std::vector<SweepCell> out;
  for (int tau : kts_grid) {
    for (const ReasonRule& rr : reason_grid) {
      ClassificationThresholds th{tau, rr, mode, strict};
      SweepCell cell{tau, rr, transition_table(records, th), {}};
      auto names = treatments_in(cell.table);
      if (names.size() >= 2) cell.tests = pairwise_tests(cell.table, names);
      out.push_back(std::move(cell));
    }
  }
  return out;
}

double frequency_to_intensity(double freq, double exposure) {
  if (!(freq >= 0.0 && freq < 1.0))
    throw std::invalid_argument("frequency must lie in [0,1)");
  if (!(exposure > 0.0)) throw std::invalid_argument("exposure must be > 0");
  return -std::log1p(-freq) / exposure;
}

std::vector<SubjectRecord> read_subjects_csv(const std::string& path) {
  csv::Table t = csv::read_file(path);
  int c_id = t.column("subject_id");
  int c_tr = t.column("treatment");
  int c_kts = t.column("kts_score");
  int c_fam = t.column("familiarity");
  int c_own = t.column("reasons_own");
  int c_opp = t.column("reasons_opp");
  int c_nfc = t.column_or("nfc_score");
  int c_cfs = t.column_or("cfs_score");
  int c_ai = t.column_or("ai_grade");
  int c_iu = t.column_or("internal_uncertainty");

  std::vector<int> grade_cols;
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i].rfind("grade_", 0) == 0) grade_cols.push_back(int(i));

  static const std::vector<std::string> kKnown = {
      "newspaper", "twitter", "facebook", "partisan_twitter"};

  std::vector<SubjectRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    std::size_t line = t.line_of(i);
    SubjectRecord r;
    r.subject_id = row[c_id];
    r.treatment = row[c_tr];
    if (std::find(kKnown.begin(), kKnown.end(), r.treatment) == kKnown.end())
      throw csv::ParseError(line, "unknown treatment '" + r.treatment + "'");
    r.kts_score = csv::to_int(row[c_kts], line, "kts_score");
    if (r.kts_score < 0 || r.kts_score > 10)
      throw csv::ParseError(line, "kts_score must lie in [0,10]");
    r.familiarity = csv::to_int(row[c_fam], line, "familiarity");
    if (r.familiarity != 0 && r.familiarity != 1)
      throw csv::ParseError(line, "familiarity must be 0 or 1");
    r.reasons_own = csv::to_int(row[c_own], line, "reasons_own");
    r.reasons_opp = csv::to_int(row[c_opp], line, "reasons_opp");
    if (r.reasons_own < 0 || r.reasons_opp < 0)
      throw csv::ParseError(line, "reason counts must be >= 0");
    for (int gc : grade_cols) {
      const std::string& g = row[gc];
      if (g.empty()) continue;
      if (g == "Pass" || g == "pass")
        r.grades.push_back(Grade::Pass);
      else if (g == "Fail" || g == "fail")
        r.grades.push_back(Grade::Fail);
      else
        throw csv::ParseError(line, "grade must be Pass or Fail, got '" + g + "'");
    }
    auto opt_double = [&](int col) -> std::optional<double> {
      if (col < 0 || row[col].empty()) return std::nullopt;
      return csv::to_double(row[col], line, t.header[col]);
    };
    r.nfc_score = opt_double(c_nfc);
    r.cfs_score = opt_double(c_cfs);
    r.ai_grade = opt_double(c_ai);
    if (c_iu >= 0 && !row[c_iu].empty()) {
      int v = csv::to_int(row[c_iu], line, "internal_uncertainty");
      if (v < 0 || v > 3)
        throw csv::ParseError(line, "internal_uncertainty must lie in [0,3]");
      r.internal_uncertainty = v;
    }
    out.push_back(std::move(r));
  }
  return out;
}

TransitionTable read_counts_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j = json::parse(in);
  if (!j.is_object() || !j.contains("treatments"))
    throw std::runtime_error(path + ": expected an object with a 'treatments' key");
  for (const auto& [key, _] : j.items())
    if (key != "treatments")
      throw std::runtime_error(path + ": unknown key '" + key + "'");

  static const std::vector<std::string> kCells = {
      "s_to_s", "s_to_a", "s_to_t", "a_to_s", "a_to_a",
      "a_to_t", "t_to_s", "t_to_a", "t_to_t"};

  TransitionTable tt;
  for (const auto& [name, cells] : j["treatments"].items()) {
    if (!cells.is_object())
      throw std::runtime_error(path + ": treatment '" + name + "' must be an object");
    TransitionCounts c;
    for (const auto& [cell, value] : cells.items()) {
      if (std::find(kCells.begin(), kCells.end(), cell) == kCells.end())
        throw std::runtime_error(path + ": unknown cell '" + cell + "'");
      if (!value.is_number_integer() || value.get<std::int64_t>() < 0)
        throw std::runtime_error(path + ": cell '" + cell +
                                 "' must be a nonnegative integer");
      std::int64_t v = value.get<std::int64_t>();
      if (cell == "s_to_s") c.s_to_s = v;
      else if (cell == "s_to_a") c.s_to_a = v;
      else if (cell == "s_to_t") c.s_to_t = v;
      else if (cell == "a_to_s") c.a_to_s = v;
      else if (cell == "a_to_a") c.a_to_a = v;
      else if (cell == "a_to_t") c.a_to_t = v;
      else if (cell == "t_to_s") c.t_to_s = v;
      else if (cell == "t_to_a") c.t_to_a = v;
      else c.t_to_t = v;
    }
    tt.by_treatment[name] = c;
  }
  return tt;
}

std::vector<std::string> treatments_in(const TransitionTable& tt) {
  // headline ordering when those treatments are present, then the rest
  // alphabetically from the map
  static const std::vector<std::string> kHeadlineOrder = {"newspaper", "twitter",
                                                          "facebook"};
  std::vector<std::string> names;
  for (const std::string& n : kHeadlineOrder)
    if (tt.by_treatment.count(n)) names.push_back(n);
  for (const auto& [n, _] : tt.by_treatment)
    if (std::find(names.begin(), names.end(), n) == names.end())
      names.push_back(n);
  return names;
}

}  // namespace ctsim::inference
