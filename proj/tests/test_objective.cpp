#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sgdmc/objective.hpp"

using sgdmc::Interval;
using sgdmc::Polynomial;
using sgdmc::SeparableObjective;

TEST(SeparableObjective, RejectsZeroSummand) {
  EXPECT_THROW(SeparableObjective({{Polynomial{0, 0, 1}, Polynomial{}}}), sgdmc::InvalidInput);
}

TEST(SeparableObjective, RejectsNonCoercive) {
  EXPECT_THROW(SeparableObjective({{Polynomial{0, 0, 1}, Polynomial{0, 0, -1}}}), sgdmc::NonCoercive);
  EXPECT_THROW(SeparableObjective({{Polynomial{0, 0, 1}, Polynomial{0, 0, 0, 1}}}), sgdmc::NonCoercive);
  EXPECT_THROW(SeparableObjective({{Polynomial{0, 0, 1}, Polynomial{0, 1}}}), sgdmc::NonCoercive);
}

TEST(SeparableObjective, RejectsRaggedTable) {
  EXPECT_THROW(SeparableObjective({{Polynomial{0, 0, 1}}, {Polynomial{0, 0, 1}, Polynomial{0, 0, 1}}}),
               sgdmc::InvalidInput);
}

TEST(SeparableObjective, ZeroComponentAllowedIfSummandNonzero) {
  SeparableObjective obj({{Polynomial{0, 0, 1}, Polynomial{}}, {Polynomial{}, Polynomial{1, -2, 1}}});
  EXPECT_EQ(obj.dimension(), 2u);
  EXPECT_EQ(obj.summands(), 2u);
  const double x[] = {1.0, 2.0};
  EXPECT_DOUBLE_EQ(obj.value(x), 0.5 * (1.0 + 1.0));
}

TEST(StateSpace, Bernoulli) {
  const auto obj = fixtures::bernoulli();
  const auto I = sgdmc::state_space(obj, sgdmc::critical_point_report(obj));
  ASSERT_EQ(I.size(), 1u);
  EXPECT_DOUBLE_EQ(I[0].lo, -1.0);
  EXPECT_DOUBLE_EQ(I[0].hi, 1.0);
}

TEST(StateSpace, DoubleWell) {
  const auto obj = sgdmc::lambda_split(fixtures::double_well(), 0.55);
  const auto I = sgdmc::state_space(obj, sgdmc::critical_point_report(obj));
  const double x0 = oracle::double_well_x0(0.55);
  EXPECT_NEAR(I[0].lo, -x0, 1e-11);
  EXPECT_NEAR(I[0].hi, x0, 1e-11);
}

TEST(StateSpace, Crossed2d) {
  const auto obj = fixtures::crossed_2d();
  const auto I = sgdmc::state_space(obj, sgdmc::critical_point_report(obj));
  ASSERT_EQ(I.size(), 2u);
  for (const auto& iv : I) {
    EXPECT_DOUBLE_EQ(iv.lo, 0.0);
    EXPECT_DOUBLE_EQ(iv.hi, 1.0);
  }
}

TEST(Lipschitz, Bernoulli) {
  const auto obj = fixtures::bernoulli();
  const Interval I[] = {{-1, 1}};
  EXPECT_DOUBLE_EQ(sgdmc::lipschitz_constant(obj, I), 2.0);
}

TEST(Lipschitz, DoubleWellMatchesClosedForm) {
  for (double lambda : {0.38, 0.55, 2.0}) {
    const auto obj = sgdmc::lambda_split(fixtures::double_well(), lambda);
    const auto I = sgdmc::state_space(obj, sgdmc::critical_point_report(obj));
    const double x0 = oracle::double_well_x0(lambda);
    EXPECT_NEAR(sgdmc::lipschitz_constant(obj, I), 3 * x0 * x0 - 1, 1e-10);
  }
  const auto obj = sgdmc::lambda_split(fixtures::double_well(), 0.38);
  const auto I = sgdmc::state_space(obj, sgdmc::critical_point_report(obj));
  const double eta0 = 1.0 / sgdmc::lipschitz_constant(obj, I);
  EXPECT_NEAR(eta0, 0.3346, 1e-4);
  EXPECT_GT(eta0, 0.33);
}

TEST(Lipschitz, MonotoneInInterval) {
  const auto obj = sgdmc::lambda_split(fixtures::eighth_order(), 0.5);
  double prev = 0.0;
  for (double w : {0.1, 0.5, 1.0, 1.4, 2.0}) {
    const Interval I[] = {{-w, w}};
    const double K = sgdmc::lipschitz_constant(obj, I);
    EXPECT_GE(K, prev);
    prev = K;
  }
}

TEST(StepConfig, RejectsLargeStep) {
  EXPECT_NO_THROW(sgdmc::make_step_config(0.4, 2.0));
  try {
    sgdmc::make_step_config(0.6, 2.0);
    FAIL() << "expected StepSizeTooLarge";
  } catch (const sgdmc::StepSizeTooLarge& e) {
    EXPECT_DOUBLE_EQ(e.eta_max(), 0.5);
  }
  EXPECT_THROW(sgdmc::make_step_config(0.0, 2.0), sgdmc::StepSizeTooLarge);
}

TEST(LambdaSplit, MeanRecoversF) {
  const auto F = fixtures::double_well();
  const auto obj = sgdmc::lambda_split(F, 0.55);
  EXPECT_EQ(obj.component(0, 0), (F + Polynomial{0, 0.55}));
  EXPECT_EQ(obj.component(0, 1), (F - Polynomial{0, 0.55}));
  const auto mean = obj.mean_component(0);
  for (int k = 0; k <= 4; ++k) EXPECT_DOUBLE_EQ(mean.coeff(k), F.coeff(k));
}

TEST(LambdaSplit, QuadraticGivesDistinctMinima) {
  const auto obj = sgdmc::lambda_split(Polynomial{0, 0, 1}, 0.7);
  const auto rep = sgdmc::critical_point_report(obj);
  EXPECT_NEAR(rep.roots[0][0][0], -0.35, 1e-14);
  EXPECT_NEAR(rep.roots[0][1][0], 0.35, 1e-14);
}

TEST(LambdaSplit, Rejects) {
  EXPECT_THROW(sgdmc::lambda_split(Polynomial{0, 0, 0, 1}, 0.5), sgdmc::NonCoercive);
  EXPECT_THROW(sgdmc::lambda_split(Polynomial{0, 0, 1}, 0.0), sgdmc::InvalidInput);
}

TEST(Maps, StrictlyMonotoneBelowStepBound) {
  for (double lambda : {0.2, 0.55, 2.0}) {
    const auto obj = sgdmc::lambda_split(fixtures::double_well(), lambda);
    const auto I = sgdmc::state_space(obj, sgdmc::critical_point_report(obj));
    const double eta = 0.99 / sgdmc::lipschitz_constant(obj, I);
    for (std::size_t i = 0; i < 2; ++i) {
      const Polynomial d = obj.component(0, i).derivative();
      double prev = -INFINITY;
      for (int k = 0; k <= 1000; ++k) {
        const double x = I[0].lo + I[0].length() * k / 1000.0;
        const double y = x - eta * d(x);
        EXPECT_GT(y, prev);
        prev = y;
      }
    }
  }
}
