#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sgdmc/polynomial.hpp"

using sgdmc::Polynomial;

TEST(Polynomial, TrimsTrailingZeros) {
  Polynomial p{1.0, 2.0, 0.0, 0.0};
  EXPECT_EQ(p.degree(), 1);
  EXPECT_TRUE(Polynomial{0.0}.is_zero());
  EXPECT_EQ(Polynomial{}.degree(), -1);
}

TEST(Polynomial, EvaluatesByHorner) {
  EXPECT_DOUBLE_EQ(sgdmc::eval_component(Polynomial{0, 0, 1}, 2.0), 4.0);
  EXPECT_DOUBLE_EQ(sgdmc::eval_component(fixtures::double_well(), 1.0), 0.0);
  EXPECT_DOUBLE_EQ(fixtures::double_well()(0.0), 0.25);
}

TEST(Polynomial, EighthOrderValueMatchesHighPrecision) {
  // 2.84 x^4 - 2.94 x^6 + 0.78 x^8 at 1.35, and the refined coefficients; both from 40-digit arithmetic.
  const Polynomial rounded{0, 0, 0, 0, 2.84, 0, -2.94, 0, 0.78};
  EXPECT_NEAR(rounded(1.35), 0.24122397621796875, 1e-14);
  EXPECT_NEAR(fixtures::eighth_order()(1.35), 0.27936649323984375, 1e-14);
}

TEST(Polynomial, Derivative) {
  EXPECT_EQ(sgdmc::derivative(Polynomial{0, 0, 1}), (Polynomial{0, 2}));
  EXPECT_EQ(fixtures::double_well().derivative(), (Polynomial{0, -1, 0, 1}));
  EXPECT_TRUE(Polynomial{5.0}.derivative().is_zero());
}

TEST(Polynomial, Arithmetic) {
  const Polynomial a{1, 1};
  const Polynomial b{-1, 1};
  EXPECT_EQ(a * b, (Polynomial{-1, 0, 1}));
  EXPECT_TRUE((a - a).is_zero());
  EXPECT_EQ(a + b, (Polynomial{0, 2}));
}

TEST(CriticalPoints, SingleRootDoubleWell) {
  const auto F = fixtures::double_well();
  const auto roots = sgdmc::critical_points(F - Polynomial{0, 0.55});
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_NEAR(roots[0], oracle::double_well_x0(0.55), 1e-11);
  EXPECT_NEAR(roots[0], 1.2066, 1e-4);
}

TEST(CriticalPoints, ThreeRootsDoubleWell) {
  const auto F = fixtures::double_well();
  const auto roots = sgdmc::critical_points(F - Polynomial{0, 0.2});
  const auto ref = oracle::double_well_roots(0.2);
  ASSERT_EQ(roots.size(), 3u);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(roots[k], ref[k], 1e-11);
  EXPECT_NEAR(roots[0] + roots[1] + roots[2], 0.0, 1e-11);
  EXPECT_NEAR(roots[0], -0.8790, 2e-4);  // quoted to four decimals
  EXPECT_NEAR(roots[1], -0.2091, 1e-4);
  EXPECT_NEAR(roots[2], 1.0881, 1e-4);
}

TEST(CriticalPoints, Quadratic) {
  const auto roots = sgdmc::critical_points(Polynomial{1, -2, 1});
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_DOUBLE_EQ(roots[0], 1.0);
}

TEST(CriticalPoints, ConstantIsDegenerate) {
  EXPECT_THROW(sgdmc::critical_points(Polynomial{3.0}), sgdmc::DegenerateDerivative);
}

TEST(CriticalPoints, DoubleRootReportedOnce) {
  // p' = (x - 1)^2 (x + 2): touching root at 1.
  const Polynomial dp = Polynomial{1, -2, 1} * Polynomial{2, 1};
  const auto roots = sgdmc::real_roots(dp);
  ASSERT_EQ(roots.size(), 2u);
  EXPECT_NEAR(roots[0], -2.0, 1e-12);
  EXPECT_NEAR(roots[1], 1.0, 1e-6);
}

TEST(CriticalPoints, NewtonRefinementIsStable) {
  const auto F = fixtures::double_well();
  for (double lambda : {0.05, 0.2, 0.38, 0.39, 0.55, 1.0, 2.0}) {
    const Polynomial dp = (F - Polynomial{0, lambda}).derivative();
    const Polynomial ddp = dp.derivative();
    for (double r : sgdmc::critical_points(F - Polynomial{0, lambda})) {
      const double refined = r - dp(r) / ddp(r);
      EXPECT_LT(std::abs(refined - r), 10 * 1e-12) << "lambda=" << lambda;
    }
  }
}

TEST(CriticalPoints, RootCountBifurcatesAtLambdaC) {
  const auto F = fixtures::double_well();
  EXPECT_EQ(sgdmc::critical_points(F - Polynomial{0, oracle::lambda_c + 1e-4}).size(), 1u);
  EXPECT_EQ(sgdmc::critical_points(F - Polynomial{0, oracle::lambda_c - 1e-4}).size(), 3u);
}

TEST(CriticalPoints, MatchesCubicOracleAcrossLambda) {
  const auto F = fixtures::double_well();
  for (int k = 1; k <= 40; ++k) {
    const double lambda = 0.05 * k;
    if (std::abs(lambda - oracle::lambda_c) < 1e-3) continue;
    const auto roots = sgdmc::critical_points(F - Polynomial{0, lambda});
    const auto ref = oracle::double_well_roots(lambda);
    ASSERT_EQ(roots.size(), ref.size()) << lambda;
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(roots[i], ref[i], 1e-11);
  }
}
