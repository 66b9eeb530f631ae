#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "fixtures.hpp"
#include "sgdmc/diffusion.hpp"

using sgdmc::Polynomial;
using sgdmc::SeparableObjective;

namespace {

// f_{1,2} = x^4/4 + x^2/2 +- (x + x^3/3): D = (1 + x^2)^2.
SeparableObjective varying_noise() {
  return SeparableObjective(
      {{Polynomial{0, 1, 0.5, 1.0 / 3.0, 0.25}, Polynomial{0, -1, 0.5, -1.0 / 3.0, 0.25}}});
}

// f_{1,2} = x^4/4 + x^2/2 +- x^3/3: D = x^4, which vanishes at the origin.
SeparableObjective degenerate_noise() {
  return SeparableObjective({{Polynomial{0, 0, 0.5, 1.0 / 3.0, 0.25}, Polynomial{0, 0, 0.5, -1.0 / 3.0, 0.25}}});
}

}  // namespace

TEST(Diffusion, LambdaSplittingHasConstantNoise) {
  for (double lambda : {0.2, 0.55, 2.0}) {
    const auto obj = sgdmc::lambda_split(fixtures::double_well(), lambda);
    const auto p = sgdmc::diffusion_polynomials(obj, 0.1);
    EXPECT_EQ(p.D.degree(), 0);
    EXPECT_NEAR(p.D.coeff(0), lambda * lambda, 1e-14);
  }
}

TEST(Diffusion, DriftIsModifiedGradient) {
  const auto obj = sgdmc::lambda_split(fixtures::double_well(), 0.3);
  const double eta = 0.2;
  const auto dd = sgdmc::drift_and_diffusion(obj, eta, {-1.0, 0.0, 0.5});
  for (std::size_t k = 0; k < dd.x.size(); ++k) {
    const double x = dd.x[k];
    const double dF = x * x * x - x;
    const double d2F = 3 * x * x - 1;
    EXPECT_NEAR(dd.u[k], dF + 0.5 * eta * dF * d2F, 1e-14);
    EXPECT_NEAR(dd.Phi[k], 0.25 * std::pow(1 - x * x, 2) + 0.25 * eta * dF * dF, 1e-14);
  }
}

TEST(Diffusion, SingleSummandIsSingular) {
  const SeparableObjective obj({{fixtures::double_well()}});
  EXPECT_THROW(sgdmc::stationary_density(obj, 0.1, sgdmc::linspace(-1.5, 1.5, 101)), sgdmc::SingularDiffusion);
}

TEST(Diffusion, ReportsVanishingPoint) {
  try {
    sgdmc::stationary_density(degenerate_noise(), 0.1, sgdmc::linspace(-1.0, 1.0, 100));
    FAIL() << "expected SingularDiffusion";
  } catch (const sgdmc::SingularDiffusion& e) {
    ASSERT_FALSE(e.points.empty());
    for (double x : e.points) EXPECT_NEAR(x, 0.0, 1e-3);
  }
  const auto p = sgdmc::diffusion_polynomials(degenerate_noise(), 0.1);
  const auto xs = sgdmc::linspace(-1.0, 1.0, 101);
  std::vector<double> D;
  for (double x : xs) D.push_back(p.D(x));
  const auto v = sgdmc::vanishing_points(xs, D);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_DOUBLE_EQ(v[0], 0.0);
  // Away from the origin the same objective is fine.
  EXPECT_NO_THROW(sgdmc::stationary_density(degenerate_noise(), 0.1, sgdmc::linspace(0.5, 1.0, 50)));
}

TEST(Diffusion, DensityIsNormalizedAndSymmetric) {
  const auto obj = sgdmc::lambda_split(fixtures::double_well(), 0.2);
  const auto prof = sgdmc::stationary_density(obj, 0.3, sgdmc::linspace(-1.5, 1.5, 3001));
  EXPECT_TRUE(prof.closed_form);
  double Z = 0.0;
  for (std::size_t k = 1; k < prof.x.size(); ++k)
    Z += 0.5 * (prof.rho[k] + prof.rho[k - 1]) * (prof.x[k] - prof.x[k - 1]);
  EXPECT_NEAR(Z, 1.0, 1e-12);
  const std::size_t n = prof.rho.size();
  for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(prof.rho[k], prof.rho[n - 1 - k], 1e-9 * prof.rho[k] + 1e-300);
  EXPECT_LT(prof.truncation_estimate, 1e-6);
  // Peaks near the minima of F.
  const auto peak = std::max_element(prof.rho.begin(), prof.rho.end()) - prof.rho.begin();
  EXPECT_NEAR(std::abs(prof.x[static_cast<std::size_t>(peak)]), 1.0, 0.1);
}

TEST(Diffusion, QuadratureMatchesClosedForm) {
  const auto obj = sgdmc::lambda_split(fixtures::double_well(), 0.55);
  const auto xs = sgdmc::linspace(-1.6, 1.6, 801);
  const auto a = sgdmc::stationary_density(obj, 0.1, xs, sgdmc::PotentialMethod::closed_form);
  const auto b = sgdmc::stationary_density(obj, 0.1, xs, sgdmc::PotentialMethod::quadrature);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    EXPECT_NEAR(a.V[k], b.V[k], 1e-8);
    EXPECT_NEAR(a.rho[k], b.rho[k], 1e-8 * std::max(1.0, a.rho[k]));
  }
  EXPECT_THROW(sgdmc::stationary_density(varying_noise(), 0.1, xs, sgdmc::PotentialMethod::closed_form),
               sgdmc::InvalidInput);
}

TEST(Diffusion, VaryingNoiseSolvesStationaryEquation) {
  // Zero flux: (eta/2) (D rho)' + u rho = 0, checked with central differences.
  const double eta = 0.1;
  const auto xs = sgdmc::linspace(-2.0, 2.0, 4001);
  const auto prof = sgdmc::stationary_density(varying_noise(), eta, xs);
  EXPECT_FALSE(prof.closed_form);
  const double h = xs[1] - xs[0];
  double worst = 0.0, scale = 0.0;
  for (std::size_t k = 1; k + 1 < xs.size(); ++k) {
    const double dDrho = (prof.D[k + 1] * prof.rho[k + 1] - prof.D[k - 1] * prof.rho[k - 1]) / (2 * h);
    worst = std::max(worst, std::abs(0.5 * eta * dDrho + prof.u[k] * prof.rho[k]));
    scale = std::max(scale, std::abs(prof.u[k] * prof.rho[k]));
  }
  EXPECT_LT(worst / scale, 1e-4);
}

TEST(Diffusion, MeasureOnGrid) {
  const auto obj = sgdmc::lambda_split(fixtures::double_well(), 0.2);
  const auto dec = sgdmc::decompose(obj, 0.3);
  const auto g = std::make_shared<const sgdmc::Grid>(sgdmc::Grid::aligned(dec, 500));
  const auto m = sgdmc::diffusion_measure(obj, 0.3, g);
  EXPECT_NEAR(m.mass(), 1.0, 1e-14);
  const auto g2 = std::make_shared<const sgdmc::Grid>(
      sgdmc::Grid::uniform(std::vector<sgdmc::Interval>{{0, 1}, {0, 1}}, 4));
  EXPECT_THROW(sgdmc::diffusion_measure(obj, 0.3, g2), sgdmc::GridMismatch);
}

TEST(Diffusion, RejectsMultiDimensionalObjective) {
  EXPECT_THROW(sgdmc::diffusion_polynomials(fixtures::crossed_2d(), 0.1), sgdmc::InvalidInput);
}
