#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "nillab/params.hpp"

using namespace nillab;

TEST(Expression, EvaluatesArithmeticAndFunctions) {
  EXPECT_DOUBLE_EQ(eval_expression("0.25"), 0.25);
  EXPECT_DOUBLE_EQ(eval_expression("1/16"), 0.0625);
  EXPECT_DOUBLE_EQ(eval_expression("sqrt(2) - 1"), std::sqrt(2.0) - 1.0);
  EXPECT_DOUBLE_EQ(eval_expression("-(3 - 5) * 2"), 4.0);
  EXPECT_DOUBLE_EQ(eval_expression("2 * pi"), 2 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(eval_expression("(sqrt(10) - sqrt(5)) / 3"), (std::sqrt(10.0) - std::sqrt(5.0)) / 3.0);
  EXPECT_DOUBLE_EQ(eval_expression(" 1e-3 "), 1e-3);
}

TEST(Expression, RejectsMalformedInput) {
  for (const char* bad : {"", "1 +", "sqrt(2", "foo", "1/0", "sqrt(-1)", "2 3", "()"}) {
    EXPECT_THROW(eval_expression(bad), std::invalid_argument) << bad;
  }
}

TEST(Defaults, AreTheExactExpressions) {
  EXPECT_DOUBLE_EQ(defaults::alpha(), std::sqrt(2.0) - 1.0);
  EXPECT_DOUBLE_EQ(defaults::beta(), std::sqrt(3.0) - 1.0);
  EXPECT_EQ(defaults::gamma(), 0.0);
  EXPECT_DOUBLE_EQ(defaults::shift(), std::sqrt(5.0) - 2.0);
}

TEST(RelationScreen, PassesIndependentSquareRoots) {
  const double a = defaults::alpha(), b = defaults::beta(), s = defaults::shift();
  const std::vector<double> v{1.0, a, b, a * s};
  EXPECT_FALSE(find_small_relation(v).has_value());
}

TEST(RelationScreen, FindsRationalShiftAndReportsSmallestRelation) {
  const double a = defaults::alpha(), b = defaults::beta();
  const std::vector<double> v{1.0, a, b, a * 0.5};
  const auto rel = find_small_relation(v);
  ASSERT_TRUE(rel.has_value());
  EXPECT_EQ(rel->coefficients, (std::vector<int>{0, 1, 0, -2}));
  EXPECT_LE(rel->residual, 1e-9);
}

TEST(RelationScreen, DetectsRationalEntries) {
  EXPECT_TRUE(find_small_relation(std::vector<double>{1.0, 0.75}).has_value());
  EXPECT_TRUE(find_small_relation(std::vector<double>{1.0, 0.0}).has_value());
  EXPECT_FALSE(find_small_relation(std::vector<double>{}).has_value());
}

TEST(RelationScreen, RespectsCoefficientBound) {
  // 13·x = 1 is outside |c| <= 12.
  const std::vector<double> v{1.0, 1.0 / 13.0};
  EXPECT_FALSE(find_small_relation(v, 12).has_value());
  EXPECT_TRUE(find_small_relation(v, 13).has_value());
}
