#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "json.hpp"
#include "pd36/error.hpp"
#include "pd36/metrics.hpp"
#include "pd36/random.hpp"
#include "support/metrics_oracle.hpp"

using namespace pd36;
using namespace pd36::testing;

TEST(Metrics, HandExample) {
  const std::vector<std::size_t> t{0, 0, 1, 1, 2, 2}, p{0, 1, 1, 1, 2, 0};
  const ConfusionMatrix cm = confusion(t, p, 3);
  EXPECT_EQ(cm.at(0, 1), 1u);
  EXPECT_EQ(cm.trace(), 4u);
  const auto pc = per_class(cm);
  EXPECT_DOUBLE_EQ(pc[0].precision, 0.5);
  EXPECT_DOUBLE_EQ(pc[1].precision, 2.0 / 3);
  EXPECT_DOUBLE_EQ(pc[1].recall, 1.0);
  EXPECT_DOUBLE_EQ(pc[2].recall, 0.5);
  EXPECT_DOUBLE_EQ(pc[1].f1, 0.8);
  const Aggregate a = aggregate(cm);
  EXPECT_DOUBLE_EQ(a.accuracy, 4.0 / 6);
  EXPECT_NEAR(a.kappa, 0.5, 1e-12);
  EXPECT_NEAR(a.balanced_accuracy, (0.5 + 1 + 0.5) / 3, 1e-12);
}

TEST(Metrics, DegenerateClassesReportZeroAndFlag) {
  const std::vector<std::size_t> t{0, 0, 1}, p{0, 0, 0};
  const auto pc = per_class(confusion(t, p, 3));
  EXPECT_EQ(pc[1].precision, 0.0); // never predicted
  EXPECT_TRUE(pc[1].degenerate);
  EXPECT_EQ(pc[2].recall, 0.0); // no support
  EXPECT_TRUE(pc[2].degenerate);
  EXPECT_FALSE(pc[0].degenerate);
}

TEST(Metrics, ConstantPredictionsGiveDegenerateMcc) {
  const std::vector<std::size_t> t{0, 1, 1}, p{1, 1, 1};
  const Aggregate a = aggregate(confusion(t, p, 2));
  EXPECT_EQ(a.mcc, 0.0);
  EXPECT_TRUE(a.mcc_degenerate);
  const std::vector<std::size_t> same{1, 1, 1};
  const Aggregate k = aggregate(confusion(same, same, 2));
  EXPECT_TRUE(k.kappa_degenerate);
  EXPECT_EQ(k.kappa, 0.0);
}

TEST(Metrics, RejectsBadInput) {
  const std::vector<std::size_t> t{0, 1}, p{0};
  EXPECT_THROW(confusion(t, p, 2), InputError);
  const std::vector<std::size_t> bad{0, 2};
  EXPECT_THROW(confusion(t, bad, 2), InputError);
  EXPECT_THROW(aggregate(confusion({}, {}, 2)), InputError);
}

TEST(Metrics, MatchBruteForceOn200RandomInstances) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Instance in = random_instance(seed);
    const Brute b = brute(in);
    const ConfusionMatrix cm = confusion(in.y_true, in.y_pred, in.classes);
    const auto pc = per_class(cm);
    const Aggregate a = aggregate(cm);
    for (std::size_t k = 0; k < in.classes; ++k) {
      ASSERT_NEAR(pc[k].precision, b.precision[k], 1e-9) << seed;
      ASSERT_NEAR(pc[k].recall, b.recall[k], 1e-9) << seed;
      ASSERT_NEAR(pc[k].f1, b.f1[k], 1e-9) << seed;
      ASSERT_EQ(pc[k].support, b.support[k]) << seed;
    }
    ASSERT_NEAR(a.accuracy, b.accuracy, 1e-9) << seed;
    ASSERT_NEAR(a.macro.precision, b.macro_p, 1e-9) << seed;
    ASSERT_NEAR(a.macro.recall, b.macro_r, 1e-9) << seed;
    ASSERT_NEAR(a.macro.f1, b.macro_f1, 1e-9) << seed;
    ASSERT_NEAR(a.weighted.precision, b.weighted_p, 1e-9) << seed;
    ASSERT_NEAR(a.weighted.recall, b.weighted_r, 1e-9) << seed;
    ASSERT_NEAR(a.weighted.f1, b.weighted_f1, 1e-9) << seed;
    ASSERT_NEAR(a.balanced_accuracy, b.macro_r, 1e-9) << seed;
    ASSERT_NEAR(a.mcc, b.mcc, 1e-9) << seed;
    ASSERT_NEAR(a.kappa, b.kappa, 1e-9) << seed;
    ASSERT_NEAR(a.weighted.recall, a.accuracy, 1e-12) << seed;
    const ScoreMatrix s = ScoreMatrix::from_rows(in.scores);
    if (b.auc) {
      ASSERT_NEAR(macro_auc(s, in.y_true).macro_auc, *b.auc, 1e-9) << seed;
    } else {
      ASSERT_THROW(macro_auc(s, in.y_true), InputError) << seed;
    }
  }
}

TEST(Metrics, InvariantUnderSampleOrderAndClassRelabelling) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Instance in = random_instance(seed);
    const Aggregate base = aggregate(confusion(in.y_true, in.y_pred, in.classes));
    Rng rng(seed + 1000);
    std::vector<std::size_t> perm(in.classes);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    std::vector<std::size_t> t, p;
    for (std::size_t i = in.y_true.size(); i-- > 0;) {
      t.push_back(perm[in.y_true[i]]);
      p.push_back(perm[in.y_pred[i]]);
    }
    const Aggregate moved = aggregate(confusion(t, p, in.classes));
    EXPECT_NEAR(moved.accuracy, base.accuracy, 1e-12);
    EXPECT_NEAR(moved.macro.f1, base.macro.f1, 1e-12);
    EXPECT_NEAR(moved.weighted.f1, base.weighted.f1, 1e-12);
    EXPECT_NEAR(moved.mcc, base.mcc, 1e-12);
    EXPECT_NEAR(moved.kappa, base.kappa, 1e-12);
  }
}

TEST(Metrics, PerfectPredictionsScoreOne) {
  const std::vector<std::size_t> t{0, 1, 2, 2, 1};
  const Aggregate a = aggregate(confusion(t, t, 3));
  EXPECT_EQ(a.accuracy, 1.0);
  EXPECT_NEAR(a.mcc, 1.0, 1e-12);
  EXPECT_NEAR(a.kappa, 1.0, 1e-12);
  EXPECT_NEAR(a.macro.f1, 1.0, 1e-12);
}

TEST(Auc, HandExampleAndExclusions) {
  // Class 0 positives score 0.9, 0.4; negatives 0.5, 0.1 -> 3 of 4 pairs.
  const ScoreMatrix s = ScoreMatrix::from_rows({{0.9, 0.1, 0}, {0.4, 0.6, 0}, {0.5, 0.5, 0}, {0.1, 0.9, 0}});
  const std::vector<std::size_t> y{0, 0, 1, 1};
  const AucResult r = macro_auc(s, y);
  ASSERT_TRUE(r.per_class[0].has_value());
  EXPECT_DOUBLE_EQ(*r.per_class[0], 0.75);
  EXPECT_FALSE(r.per_class[2].has_value());
  EXPECT_EQ(r.excluded, (std::vector<std::size_t>{2}));
  const std::vector<std::size_t> one{0, 0, 0, 0};
  EXPECT_THROW(macro_auc(s, one), InputError);
}

TEST(Margins, RowsAndCsv) {
  const ScoreMatrix s = ScoreMatrix::from_rows({{0.7, 0.2, 0.1}, {0.5, 0.3, 0.2}});
  const std::vector<std::size_t> y{0, 1};
  const auto rows = margins(s, y);
  EXPECT_DOUBLE_EQ(rows[0].margin, 0.5);
  EXPECT_TRUE(rows[0].correct);
  EXPECT_DOUBLE_EQ(rows[1].c_true, 0.3);
  EXPECT_DOUBLE_EQ(rows[1].c_best, 0.5);
  EXPECT_DOUBLE_EQ(rows[1].c_second, 0.3);
  EXPECT_DOUBLE_EQ(rows[1].margin, 0.0);
  EXPECT_FALSE(rows[1].correct);
  const std::string csv = margins_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "c_true,c_best,c_second,margin,correct");
  EXPECT_NE(csv.find("0.69999999999999996,0.69999999999999996,0.20000000000000001,"), std::string::npos);
  EXPECT_THROW(margins(ScoreMatrix::from_rows({{1.0}}), std::vector<std::size_t>{0}), InputError);
}

TEST(Report, TextJsonAndConfusionCsv) {
  const std::vector<std::size_t> t{0, 0, 1, 1, 2, 2}, p{0, 1, 1, 1, 2, 0};
  const std::vector<std::string> labels{"Apple___healthy", "Apple___Black_rot", "Corn_(maize)___healthy"};
  const MetricsReport r = build_report(t, p, labels);
  const std::string text = format_report_text(r);
  EXPECT_NE(text.find("precision"), std::string::npos);
  EXPECT_NE(text.find("f1_score"), std::string::npos);
  EXPECT_NE(text.find("0.66667"), std::string::npos);
  EXPECT_NE(text.find("macro avg"), std::string::npos);
  EXPECT_NE(text.find("weighted avg"), std::string::npos);
  const auto j = nlohmann::json::parse(format_report_json(r));
  EXPECT_EQ(j["classes"].size(), 3u);
  EXPECT_DOUBLE_EQ(j["classes"][1]["recall"].get<double>(), 1.0);
  const std::string csv = confusion_csv(r.confusion, labels);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "true\\predicted,Apple___healthy,Apple___Black_rot,Corn_(maize)___healthy");
  EXPECT_NE(csv.find("Apple___healthy,1,1,0\n"), std::string::npos);
  EXPECT_THROW(confusion_csv(r.confusion, {"a"}), InputError);
}
