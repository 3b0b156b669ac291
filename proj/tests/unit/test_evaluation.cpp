#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "test_util.hpp"
#include "tsimg/evaluation.hpp"

namespace tsimg {
namespace {

using testing::code_of;
using testing::random_matrix;

TEST(Metrics, MatchNaiveLoops) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix a = random_matrix(rng, 3, 5, 3.0);
    const Matrix b = random_matrix(rng, 3, 5, 3.0);
    double se = 0.0;
    double ae = 0.0;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 5; ++c) {
        se += (a(r, c) - b(r, c)) * (a(r, c) - b(r, c));
        ae += std::abs(a(r, c) - b(r, c));
      }
    }
    EXPECT_NEAR(metric_mse(a, b), se / 15.0, 1e-12);
    EXPECT_NEAR(metric_mae(a, b), ae / 15.0, 1e-12);
  }
}

TEST(Metrics, KnownValues) {
  const Matrix truth = Matrix::Constant(2, 4, 1.0);
  EXPECT_EQ(metric_mse(truth, truth), 0.0);
  EXPECT_EQ(metric_mae(truth, truth), 0.0);
  EXPECT_EQ(metric_mse(truth.array() + 2.0, truth), 4.0);
  EXPECT_EQ(metric_mae(truth.array() + 2.0, truth), 2.0);
  EXPECT_EQ(code_of([] { metric_mse(Matrix::Zero(2, 3), Matrix::Zero(3, 2)); }), ErrorCode::ShapeMismatch);
}

TEST(Metrics, Accuracy) {
  const std::vector<int> labels{0, 1, 2, 1};
  EXPECT_EQ(metric_accuracy(labels, labels), 1.0);
  EXPECT_EQ(metric_accuracy(std::vector<int>{1, 0, 0, 0}, labels), 0.0);
  EXPECT_EQ(metric_accuracy(std::vector<int>{0, 1, 2, 0}, labels), 0.75);
  EXPECT_EQ(code_of([] { metric_accuracy({}, {}); }), ErrorCode::EmptyInput);
}

MultivariateSeries counting(int d, int T) {
  Matrix m(d, T);
  for (int r = 0; r < d; ++r) {
    for (int t = 0; t < T; ++t) m(r, t) = 1.0 + t + 100.0 * r;
  }
  return MultivariateSeries(m);
}

TEST(Perturb, ExHalfSwapsHalves) {
  const auto out = perturb(counting(1, 4), {PerturbKind::ExHalf, 0});
  EXPECT_EQ(out.values, (Matrix(1, 4) << 3, 4, 1, 2).finished());
  const auto odd = perturb(counting(1, 5), {PerturbKind::ExHalf, 0});
  EXPECT_EQ(odd.values, (Matrix(1, 5) << 4, 5, 1, 2, 3).finished());
}

TEST(Perturb, ExHalfTwiceIsIdentityForEvenT) {
  Rng rng(2);
  const MultivariateSeries x(random_matrix(rng, 3, 96));
  const PerturbMode m{PerturbKind::ExHalf, 0};
  EXPECT_EQ(perturb(perturb(x, m), m).values, x.values);
}

TEST(Perturb, ShufflesPreserveMultisetsJointly) {
  const auto x = counting(3, 31);
  for (PerturbKind k : {PerturbKind::SfAll, PerturbKind::SfHalf, PerturbKind::ExHalf}) {
    const auto y = perturb(x, {k, 17});
    for (int r = 0; r < 3; ++r) {
      std::vector<double> a(x.values.row(r).begin(), x.values.row(r).end());
      std::vector<double> b(y.values.row(r).begin(), y.values.row(r).end());
      std::sort(b.begin(), b.end());
      EXPECT_EQ(a, b);
    }
    // Same permutation for every variate.
    EXPECT_TRUE(((y.values.row(1).array() - 100.0) == y.values.row(0).array()).all());
  }
}

TEST(Perturb, SfHalfKeepsSecondHalf) {
  const auto x = counting(1, 20);
  const auto y = perturb(x, {PerturbKind::SfHalf, 5});
  EXPECT_EQ(y.values.rightCols(10), x.values.rightCols(10));
  EXPECT_NE(y.values, x.values);
}

TEST(Perturb, MaskingZerosHalfTheSteps) {
  const auto x = counting(2, 11);
  const auto y = perturb(x, {PerturbKind::Masking, 3});
  int zeroed = 0;
  for (int t = 0; t < 11; ++t) {
    const bool z0 = y.values(0, t) == 0.0;
    EXPECT_EQ(z0, y.values(1, t) == 0.0);
    if (z0) {
      ++zeroed;
    } else {
      EXPECT_EQ(y.values.col(t), x.values.col(t));
    }
  }
  EXPECT_EQ(zeroed, 5);
}

TEST(Perturb, SeededAndValidated) {
  const auto x = counting(1, 40);
  EXPECT_EQ(perturb(x, {PerturbKind::SfAll, 1}).values, perturb(x, {PerturbKind::SfAll, 1}).values);
  EXPECT_NE(perturb(x, {PerturbKind::SfAll, 1}).values, perturb(x, {PerturbKind::SfAll, 2}).values);
  EXPECT_EQ(code_of([] { perturb(counting(1, 1), {}); }), ErrorCode::TooShort);
  for (PerturbKind k : {PerturbKind::SfAll, PerturbKind::SfHalf, PerturbKind::ExHalf, PerturbKind::Masking}) {
    EXPECT_EQ(parse_perturb_kind(to_string(k)), k);
  }
  EXPECT_FALSE(parse_perturb_kind("reverse").has_value());
}

TEST(PerformanceDrop, Directions) {
  EXPECT_DOUBLE_EQ(performance_drop(80.0, 40.0, Better::Higher), 50.0);
  EXPECT_DOUBLE_EQ(performance_drop(0.4, 0.6, Better::Lower), 50.0);
  EXPECT_EQ(performance_drop(0.3, 0.3, Better::Lower), 0.0);
  EXPECT_EQ(code_of([] { performance_drop(0.0, 1.0, Better::Lower); }), ErrorCode::DivByZero);
}

TEST(Reoccurrence, ClosedFormExamples) {
  EXPECT_EQ(reoccurrence_n(6, 6), 1);
  EXPECT_EQ(reoccurrence_n(3, 6), 2);
  EXPECT_EQ(reoccurrence_n(5, 6), 6);
  std::vector<int> curve;
  for (int i = 1; i <= 12; ++i) curve.push_back(reoccurrence_n(i, 6));
  EXPECT_EQ(curve, (std::vector<int>{6, 3, 2, 3, 6, 1, 6, 3, 2, 3, 6, 1}));
  EXPECT_EQ(code_of([] { reoccurrence_n(0, 6); }), ErrorCode::NonPositive);
}

TEST(Reoccurrence, BruteForceExamples) {
  EXPECT_EQ(reoccurrence_brute_force(6, 6, 6), 1);
  EXPECT_EQ(reoccurrence_brute_force(4, 6, 6), 3);
  EXPECT_EQ(code_of([] { reoccurrence_brute_force(1, 4, 6); }), ErrorCode::NonIntegerSegment);
  EXPECT_EQ(brute_force_period(1), 3);
  EXPECT_EQ(brute_force_period(2), 4);
  EXPECT_EQ(brute_force_period(6), 6);
}

TEST(Reoccurrence, ClosedFormEqualsSimulation) {
  for (int k = 1; k <= 24; ++k) {
    const int L = brute_force_period(k);
    for (int i = 1; i <= 24; ++i) ASSERT_EQ(reoccurrence_n(i, k), reoccurrence_brute_force(i, k, L)) << i << "/" << k;
  }
}

}  // namespace
}  // namespace tsimg
