#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ctsim/csv.hpp"
#include "ctsim/inference.hpp"
#include "ctsim/rng.hpp"

using namespace ctsim;
using namespace ctsim::inference;

namespace {

SubjectRecord subject(std::string id, std::string treatment, int kts, int fam,
                      int own, int opp, std::vector<Grade> grades) {
  SubjectRecord r;
  r.subject_id = std::move(id);
  r.treatment = std::move(treatment);
  r.kts_score = kts;
  r.familiarity = fam;
  r.reasons_own = own;
  r.reasons_opp = opp;
  r.grades = std::move(grades);
  return r;
}

const char* kDataDir = CTSIM_DATA_DIR;

}  // namespace

TEST_CASE("grade aggregation") {
  std::vector<Grade> ppf{Grade::Pass, Grade::Pass, Grade::Fail};
  CHECK(aggregate_grades(ppf, GradeMode::Majority) == Grade::Pass);
  CHECK(aggregate_grades(ppf, GradeMode::Unanimity) == Grade::Fail);

  // even count, split vote: "strictly more" resolves to Fail
  std::vector<Grade> pf{Grade::Pass, Grade::Fail};
  CHECK(aggregate_grades(pf, GradeMode::Majority) == Grade::Fail);

  std::vector<Grade> empty;
  CHECK_THROWS_AS(aggregate_grades(empty, GradeMode::Majority),
                  std::invalid_argument);
}

TEST_CASE("unanimity passes are a subset of majority passes") {
  rng::Stream s = rng::Stream::from_seed(301);
  for (int i = 0; i < 500; ++i) {
    std::vector<Grade> grades;
    int n = 1 + int(s.next_unit() * 5.0);
    for (int k = 0; k < n; ++k)
      grades.push_back(s.next_bernoulli(0.5) ? Grade::Pass : Grade::Fail);
    if (aggregate_grades(grades, GradeMode::Unanimity) == Grade::Pass)
      CHECK(aggregate_grades(grades, GradeMode::Majority) == Grade::Pass);
  }
}

TEST_CASE("pre-treatment classification: three-pronged rule") {
  ClassificationThresholds th;
  CHECK(classify_pre(subject("a", "twitter", 8, 1, 2, 2, {}), th) == PreState::A);
  CHECK(classify_pre(subject("b", "twitter", 4, 1, 2, 2, {}), th) == PreState::S);
  CHECK(classify_pre(subject("c", "twitter", 10, 0, 2, 2, {}), th) == PreState::S);
  // reasons prong: needs one per side and three in total
  CHECK(classify_pre(subject("d", "twitter", 8, 1, 2, 0, {}), th) == PreState::S);
  CHECK(classify_pre(subject("e", "twitter", 8, 1, 1, 1, {}), th) == PreState::S);
  CHECK(classify_pre(subject("f", "twitter", 8, 1, 1, 2, {}), th) == PreState::A);
  // boundary: kts == tau passes under >=, fails under strict >
  CHECK(classify_pre(subject("g", "twitter", 7, 1, 2, 2, {}), th) == PreState::A);
  ClassificationThresholds strict = th;
  strict.strict = true;
  CHECK(classify_pre(subject("g", "twitter", 7, 1, 2, 2, {}), strict) ==
        PreState::S);
}

TEST_CASE("classify_pre is monotone in the thresholds") {
  rng::Stream s = rng::Stream::from_seed(302);
  for (int i = 0; i < 500; ++i) {
    SubjectRecord r = subject("x", "twitter", int(s.next_unit() * 11.0),
                              s.next_bernoulli(0.7) ? 1 : 0,
                              int(s.next_unit() * 4.0), int(s.next_unit() * 4.0), {});
    ClassificationThresholds lo{int(s.next_unit() * 10.0),
                                ReasonRule{1, 1 + int(s.next_unit() * 3.0)},
                                GradeMode::Majority, false};
    ClassificationThresholds hi = lo;
    hi.tau_kts = lo.tau_kts + 1;
    hi.reason_rule.total = lo.reason_rule.total + 1;
    if (classify_pre(r, lo) == PreState::S) CHECK(classify_pre(r, hi) == PreState::S);
  }
}

TEST_CASE("post-treatment classification follows the grade aggregate") {
  ClassificationThresholds th;
  auto r = subject("a", "twitter", 5, 0, 0, 0,
                   {Grade::Pass, Grade::Pass, Grade::Pass});
  CHECK(classify_post(r, th) == PreState::A);
  r.grades = {Grade::Pass, Grade::Fail, Grade::Fail};
  CHECK(classify_post(r, th) == PreState::S);
  r.grades = {Grade::Pass, Grade::Pass, Grade::Fail};
  CHECK(classify_post(r, th) == PreState::A);
  th.grade_mode = GradeMode::Unanimity;
  CHECK(classify_post(r, th) == PreState::S);
  r.grades.clear();
  CHECK_THROWS_AS(classify_post(r, th), std::invalid_argument);
}

TEST_CASE("transition table and the irreversibility guard") {
  ClassificationThresholds th;
  std::vector<SubjectRecord> empty;
  CHECK(transition_table(empty, th).by_treatment.empty());

  std::vector<SubjectRecord> rs;
  rs.push_back(subject("a", "twitter", 4, 1, 2, 2, {Grade::Fail, Grade::Fail, Grade::Fail}));
  rs.push_back(subject("b", "twitter", 4, 1, 2, 2, {Grade::Pass, Grade::Pass, Grade::Fail}));
  rs.push_back(subject("c", "twitter", 9, 1, 2, 2, {Grade::Pass, Grade::Pass, Grade::Pass}));
  TransitionTable tt = transition_table(rs, th);
  CHECK(tt.by_treatment["twitter"].s_to_s == 1);
  CHECK(tt.by_treatment["twitter"].s_to_a == 1);
  CHECK(tt.by_treatment["twitter"].a_to_a == 1);

  // pre-A whose essay fails: the pipeline must refuse, naming the subject
  rs.push_back(subject("bad", "twitter", 9, 1, 2, 2,
                       {Grade::Fail, Grade::Fail, Grade::Fail}));
  try {
    transition_table(rs, th);
    FAIL("expected IrreversibilityError");
  } catch (const IrreversibilityError& e) {
    REQUIRE(e.subject_ids.size() == 1);
    CHECK(e.subject_ids[0] == "bad");
  }
}

TEST_CASE("published counts fixture: lambda-hat point estimates and SEs") {
  TransitionTable tt = read_counts_json(std::string(kDataDir) + "/classification_counts.json");
  REQUIRE(tt.by_treatment.size() == 3);

  LambdaEstimate np = estimate_lambda_hat(tt, "newspaper");
  CHECK(np.freq == 49.0 / 160.0);
  CHECK(np.n == 160);
  LambdaEstimate tw = estimate_lambda_hat(tt, "twitter");
  CHECK(tw.freq == 43.0 / 178.0);
  LambdaEstimate fb = estimate_lambda_hat(tt, "facebook");
  CHECK(fb.freq == 60.0 / 171.0);
  CHECK(fb.se == doctest::Approx(std::sqrt(fb.freq * (1 - fb.freq) / 171.0))
                     .epsilon(1e-15));

  CHECK_THROWS_AS(estimate_lambda_hat(tt, "radio"), std::invalid_argument);
}

TEST_CASE("published counts fixture: pairwise t-ratios reproduce the headline matrix") {
  TransitionTable tt = read_counts_json(std::string(kDataDir) + "/classification_counts.json");
  auto names = treatments_in(tt);
  REQUIRE(names == std::vector<std::string>{"newspaper", "twitter", "facebook"});
  auto tests = pairwise_tests(tt, names);
  REQUIRE(tests.size() == 3);
  CHECK(tests[0].lhs == "newspaper");
  CHECK(tests[0].rhs == "twitter");
  CHECK(tests[0].test.t_ratio == doctest::Approx(1.332).epsilon(0.004));
  CHECK(tests[1].rhs == "facebook");
  CHECK(tests[1].test.t_ratio == doctest::Approx(-0.865).epsilon(0.006));
  CHECK(tests[2].lhs == "twitter");
  CHECK(tests[2].test.t_ratio == doctest::Approx(-2.249).epsilon(0.003));

  // star pattern under the published legend: only twitter-facebook marked, **
  CHECK(stats::stars(tests[0].test.p_value, stats::kLegendLoose) == "");
  CHECK(stats::stars(tests[1].test.p_value, stats::kLegendLoose) == "");
  CHECK(stats::stars(tests[2].test.p_value, stats::kLegendLoose) == "**");
}

TEST_CASE("two-proportion test basics") {
  auto t = two_prop_test(0.30625, 160, 0.2415730337078652, 178);
  CHECK(t.t_ratio == doctest::Approx(1.332).epsilon(0.001));
  auto swapped = two_prop_test(0.2415730337078652, 178, 0.30625, 160);
  CHECK(swapped.t_ratio == -t.t_ratio);  // antisymmetry, exact by construction
  CHECK(two_prop_test(0.4, 50, 0.4, 50).t_ratio == 0.0);
  CHECK_THROWS_AS(two_prop_test(0.5, 0, 0.5, 10), std::invalid_argument);

  rng::Stream s = rng::Stream::from_seed(303);
  for (int i = 0; i < 300; ++i) {
    double f1 = s.next_unit(), f2 = s.next_unit();
    std::int64_t n1 = 1 + std::int64_t(s.next_unit() * 400);
    std::int64_t n2 = 1 + std::int64_t(s.next_unit() * 400);
    auto a = two_prop_test(f1, n1, f2, n2);
    auto b = two_prop_test(f2, n2, f1, n1);
    CHECK(a.t_ratio == -b.t_ratio);
  }
}

TEST_CASE("three-state counts fixture passes the irreversibility audit") {
  TransitionTable tt = read_counts_json(std::string(kDataDir) + "/three_state_counts.json");
  CHECK(irreversibility_violations(tt).empty());
  const TransitionCounts& c = tt.by_treatment.at("pooled");
  CHECK(c.s_to_s + c.s_to_a + c.s_to_t == 667);
  CHECK(estimate_lambda_hat(tt, "pooled").freq ==
        doctest::Approx(153.0 / 628.0).epsilon(1e-15));

  TransitionTable bad = tt;
  bad.by_treatment["pooled"].a_to_s = 1;
  auto violations = irreversibility_violations(bad);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("a_to_s") != std::string::npos);
}

TEST_CASE("subgroup splits") {
  std::vector<SubjectRecord> rs;
  for (int i = 0; i < 6; ++i) {
    SubjectRecord r = subject("s" + std::to_string(i), "twitter", 5, 1, 1, 1, {});
    r.nfc_score = 3.0;           // all equal: everyone lands high under >=
    r.cfs_score = 50.0 + 2.0 * i;
    rs.push_back(r);
  }
  auto all_equal = subgroup_split(rs, SplitMetric::NFC, SplitCut{true, 0.0});
  CHECK(all_equal.high.size() == 6);
  CHECK(all_equal.low.empty());

  auto fixed = subgroup_split(rs, SplitMetric::CFS, SplitCut{false, 55.0});
  CHECK(fixed.cut_value == 55.0);
  CHECK(fixed.high.size() == 3);  // 56, 58, 60
  CHECK(fixed.low.size() == 3);   // 50, 52, 54

  // bimodal scores straddle the sample-mean cut
  std::vector<SubjectRecord> bimodal;
  rng::Stream s = rng::Stream::from_seed(304);
  for (int i = 0; i < 100; ++i) {
    SubjectRecord r = subject("b" + std::to_string(i), "twitter", 5, 1, 1, 1, {});
    r.nfc_score = (i % 2 == 0 ? 2.0 : 4.0) + 0.1 * s.next_unit();
    bimodal.push_back(r);
  }
  auto split = subgroup_split(bimodal, SplitMetric::NFC, SplitCut{true, 0.0});
  double mean_high = 0, mean_low = 0;
  for (const auto& r : split.high) mean_high += *r.nfc_score;
  for (const auto& r : split.low) mean_low += *r.nfc_score;
  mean_high /= double(split.high.size());
  mean_low /= double(split.low.size());
  CHECK(mean_low < split.cut_value);
  CHECK(mean_high >= split.cut_value);

  rs[0].nfc_score.reset();
  CHECK_THROWS_AS(subgroup_split(rs, SplitMetric::NFC, SplitCut{true, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("threshold sweep: baseline cell equals the direct pipeline") {
  auto records = read_subjects_csv(std::string(kDataDir) + "/subjects_demo.csv");
  ClassificationThresholds th;
  TransitionTable base = transition_table(records, th);

  std::vector<int> kts{7};
  std::vector<ReasonRule> rules{ReasonRule{1, 3}};
  auto cells = threshold_sweep(records, kts, rules, GradeMode::Majority);
  REQUIRE(cells.size() == 1);
  for (const auto& [name, c] : base.by_treatment) {
    CHECK(cells[0].table.by_treatment.at(name).s_to_s == c.s_to_s);
    CHECK(cells[0].table.by_treatment.at(name).s_to_a == c.s_to_a);
    CHECK(cells[0].table.by_treatment.at(name).a_to_a == c.a_to_a);
  }

  // rising KTS thresholds can only shrink the pre-A pool
  std::vector<int> grid{6, 7, 8};
  std::vector<ReasonRule> rules2{ReasonRule{1, 3}, ReasonRule{1, 4}};
  auto sweep = threshold_sweep(records, grid, rules2, GradeMode::Majority);
  REQUIRE(sweep.size() == 6);
  auto pre_a_total = [](const TransitionTable& tt) {
    std::int64_t n = 0;
    for (const auto& [_, c] : tt.by_treatment) n += c.a_to_a + c.a_to_s;
    return n;
  };
  CHECK(pre_a_total(sweep[0].table) >= pre_a_total(sweep[2].table));
  CHECK(pre_a_total(sweep[2].table) >= pre_a_total(sweep[4].table));
}

TEST_CASE("frequency-to-intensity bridge") {
  CHECK(frequency_to_intensity(0.0, 2.0) == 0.0);
  CHECK(frequency_to_intensity(1.0 - std::exp(-1.0), 1.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // Facebook fixture frequency: -ln(111/171)
  CHECK(frequency_to_intensity(60.0 / 171.0, 1.0) ==
        doctest::Approx(-std::log(111.0 / 171.0)).epsilon(1e-14));
  CHECK(frequency_to_intensity(60.0 / 171.0, 1.0) ==
        doctest::Approx(0.4321323).epsilon(1e-6));
  CHECK_THROWS_AS(frequency_to_intensity(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(frequency_to_intensity(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("intensity recovery on model-generated transitions") {
  const double lambda = 0.8, dt = 1.0;
  const int n = 50000;
  rng::Stream s = rng::Stream::from_seed(305);
  std::int64_t moved = 0;
  for (int i = 0; i < n; ++i)
    if (s.next_bernoulli(1.0 - std::exp(-lambda * dt))) ++moved;
  double f = double(moved) / n;
  double se_f = std::sqrt(f * (1.0 - f) / n);
  double lam_hat = frequency_to_intensity(f, dt);
  double se_lam = se_f / ((1.0 - f) * dt);  // delta method
  CHECK(std::abs(lam_hat - lambda) < 4.0 * se_lam);
}

TEST_CASE("subjects CSV parsing and its error reporting") {
  auto records = read_subjects_csv(std::string(kDataDir) + "/subjects_demo.csv");
  REQUIRE(records.size() == 13);
  CHECK(records[0].subject_id == "s01");
  CHECK(records[0].grades.size() == 3);
  CHECK(records[6].internal_uncertainty == std::nullopt);
  REQUIRE(records[1].nfc_score.has_value());
  CHECK(*records[1].nfc_score == doctest::Approx(2.8));

  std::string path = "subjects_bad_tmp.csv";
  {
    std::ofstream out(path);
    out << "subject_id,treatment,kts_score,familiarity,reasons_own,reasons_opp,"
           "grade_1,nfc_score,cfs_score,ai_grade,internal_uncertainty\n";
    out << "ok,twitter,5,1,1,1,Pass,3.0,50,60,1\n";
    out << "bad,twitter,eleven,1,1,1,Pass,3.0,50,60,1\n";
  }
  try {
    read_subjects_csv(path);
    FAIL("expected ParseError");
  } catch (const csv::ParseError& e) {
    CHECK(e.line() == 3);  // malformed rows are reported with line numbers
  }
  std::remove(path.c_str());
}

TEST_CASE("counts JSON rejects unknown keys and negative cells") {
  std::string path = "counts_bad_tmp.json";
  {
    std::ofstream out(path);
    out << R"({"treatments": {"x": {"s_to_s": 1, "s_to_b": 2}}})";
  }
  CHECK_THROWS(read_counts_json(path));
  {
    std::ofstream out(path);
    out << R"({"treatments": {"x": {"s_to_s": -1}}})";
  }
  CHECK_THROWS(read_counts_json(path));
  std::remove(path.c_str());
}
