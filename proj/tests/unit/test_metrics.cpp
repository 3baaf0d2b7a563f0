#include <gtest/gtest.h>

#include "revdetect/metrics.hpp"

using namespace revdetect;

TEST(Confusion, CountsCells) {
  const std::vector<int> t{1, 1, 0, 0, 1, 0}, p{1, 0, 1, 0, 1, 0};
  EXPECT_EQ(confusion_matrix(t, p), (Confusion{2, 1, 1, 2}));
  EXPECT_THROW(confusion_matrix(std::vector<int>{}, std::vector<int>{}), DataError);
  EXPECT_THROW(confusion_matrix(t, std::vector<int>{1}), DataError);
}

TEST(Metrics, WorkedExample) {
  const Confusion c{8, 2, 1, 9};
  EXPECT_DOUBLE_EQ(accuracy(c), 0.85);
  EXPECT_DOUBLE_EQ(precision(c), 0.8);
  EXPECT_DOUBLE_EQ(recall(c), 8.0 / 9.0);
  EXPECT_NEAR(f1(c), 16.0 / 19.0, 1e-15);
  EXPECT_DOUBLE_EQ(fpr_fnr(c).fpr, 2.0 / 11.0);
  EXPECT_DOUBLE_EQ(fpr_fnr(c).fnr, 1.0 / 9.0);
  EXPECT_FALSE(evaluate_confusion(c).degenerate);
}

TEST(Metrics, ZeroDenominatorIsDegenerate) {
  const Confusion c{0, 0, 3, 7};
  EXPECT_EQ(precision(c).value, 0.0);
  EXPECT_TRUE(precision(c).degenerate);
  EXPECT_TRUE(f1(c).degenerate);
  EXPECT_TRUE(evaluate_confusion(c).degenerate);
  EXPECT_EQ(accuracy(c), 0.7);
}

TEST(Auc, Examples) {
  EXPECT_DOUBLE_EQ(auc_roc(std::vector<int>{0, 0, 1, 1}, std::vector<double>{0.1, 0.4, 0.35, 0.8}), 0.75);
  EXPECT_DOUBLE_EQ(auc_roc(std::vector<int>{0, 1, 0, 1}, std::vector<double>{0.5, 0.5, 0.5, 0.5}), 0.5);
  EXPECT_DOUBLE_EQ(auc_roc(std::vector<int>{1, 0}, std::vector<double>{0.9, 0.1}), 1.0);
  EXPECT_DOUBLE_EQ(auc_roc(std::vector<int>{1, 0}, std::vector<double>{0.1, 0.9}), 0.0);
  EXPECT_THROW(auc_roc(std::vector<int>{1, 1}, std::vector<double>{0.1, 0.9}), DataError);
}

TEST(Auc, InvariantUnderMonotoneTransform) {
  const std::vector<int> y{0, 1, 1, 0, 1, 0, 0, 1};
  const std::vector<double> s{0.2, 0.7, 0.4, 0.3, 0.9, 0.4, 0.1, 0.6};
  std::vector<double> t;
  for (double v : s) t.push_back(v * v * 3.0 + 1.0);
  EXPECT_DOUBLE_EQ(auc_roc(y, s), auc_roc(y, t));
}

TEST(Evaluate, ThresholdAndJson) {
  const std::vector<int> y{0, 1, 1, 0};
  const std::vector<double> p{0.49, 0.5, 0.9, 0.1};
  const auto r = evaluate_scores(y, p);
  EXPECT_EQ(r.confusion, (Confusion{2, 0, 0, 2}));
  EXPECT_EQ(r.auc_roc, 1.0);
  const auto j = to_json(r);
  EXPECT_EQ(j.at("confusion").at("tp"), 2);
  EXPECT_EQ(j.at("accuracy"), 1.0);
}

TEST(Evaluate, SingleClassFlagsDegenerate) {
  const auto r = evaluate_scores(std::vector<int>{1, 1}, std::vector<double>{0.9, 0.2});
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.recall, 0.5);
}
