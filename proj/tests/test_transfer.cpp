#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "fixtures.hpp"
#include "sgdmc/transfer.hpp"

using sgdmc::DiscreteMeasure;
using sgdmc::Grid;
using sgdmc::MapFamily;

namespace {

double row_sum(const sgdmc::SparseMatrix& P, Eigen::Index r) {
  double s = 0.0;
  for (sgdmc::SparseMatrix::InnerIterator it(P, r); it; ++it) s += it.value();
  return s;
}

struct DoubleWellSetup {
  sgdmc::SeparableObjective obj = sgdmc::lambda_split(fixtures::double_well(), 0.2);
  double eta = 0.3;
  MapFamily fam{obj, eta};
  sgdmc::Decomposition dec = sgdmc::decompose(obj, eta);
};

}  // namespace

TEST(Ulam, BernoulliTwoCellsByHand) {
  const MapFamily fam(fixtures::bernoulli(), 0.25);
  const auto dec = sgdmc::decompose(fam.objective(), 0.25);
  const auto g = std::make_shared<const Grid>(Grid::uniform(dec.I, 2));
  const auto op = sgdmc::ulam_assemble(fam, g, dec);
  const Eigen::MatrixXd P(op.P);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) EXPECT_DOUBLE_EQ(P(r, c), 0.5);
}

TEST(Ulam, RowsAreStochastic) {
  DoubleWellSetup s;
  const auto g = std::make_shared<const Grid>(Grid::aligned(s.dec, 500));
  const auto op = sgdmc::ulam_assemble(s.fam, g, s.dec);
  EXPECT_LT(op.max_row_defect, 1e-14);
  for (Eigen::Index r = 0; r < op.P.rows(); ++r) EXPECT_NEAR(row_sum(op.P, r), 1.0, 1e-14);
  for (double leak : op.leakage) EXPECT_EQ(leak, 0.0);
  for (Eigen::Index r = 0; r < op.P.rows(); ++r)
    for (sgdmc::SparseMatrix::InnerIterator it(op.P, r); it; ++it) EXPECT_GE(it.value(), 0.0);
}

TEST(Ulam, RowsAreStochasticInTwoDimensions) {
  const auto obj = fixtures::double_well_2d(0.2, 0.3);
  const MapFamily fam(obj, 0.3);
  const auto dec = sgdmc::decompose(obj, 0.3);
  const auto g = std::make_shared<const Grid>(Grid::aligned(dec, 40));
  const auto op = sgdmc::ulam_assemble(fam, g, dec);
  EXPECT_LT(op.max_row_defect, 1e-13);
  for (double leak : op.leakage) EXPECT_EQ(leak, 0.0);
}

TEST(Ulam, ZeroStepIsIdentity) {
  const auto obj = sgdmc::lambda_split(fixtures::double_well(), 0.2);
  const auto dec = sgdmc::decompose(obj, 0.3);
  const auto fam = MapFamily::unchecked(obj, 0.0);
  const auto g = std::make_shared<const Grid>(Grid::uniform(dec.I, 50));
  const auto op = sgdmc::ulam_assemble(fam, g, dec);
  const Eigen::MatrixXd P(op.P);
  EXPECT_LT((P - Eigen::MatrixXd::Identity(50, 50)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Ulam, PushForwardKeepsMass) {
  DoubleWellSetup s;
  const auto g = std::make_shared<const Grid>(Grid::aligned(s.dec, 300));
  const auto op = sgdmc::ulam_assemble(s.fam, g, s.dec);
  auto mu = DiscreteMeasure::uniform(g);
  for (int k = 0; k < 50; ++k) mu = sgdmc::push_forward(op, mu);
  EXPECT_NEAR(mu.mass(), 1.0, 1e-13);
  const auto other = std::make_shared<const Grid>(Grid::uniform(s.dec.I, 10));
  EXPECT_THROW(sgdmc::push_forward(op, DiscreteMeasure::uniform(other)), sgdmc::GridMismatch);
}

TEST(Invariant, BernoulliIsUniform) {
  const MapFamily fam(fixtures::bernoulli(), 0.25);
  const auto dec = sgdmc::decompose(fam.objective(), 0.25);
  const auto g = std::make_shared<const Grid>(Grid::uniform(dec.I, 2000));
  const auto op = sgdmc::ulam_assemble(fam, g, dec);
  const auto r = sgdmc::invariant_measure(op, 0, 1e-10, 100000);
  EXPECT_LT(sgdmc::d_F(r.measure, DiscreteMeasure::uniform(g)), 1e-9);
  EXPECT_LT(r.residual, 1e-9);
}

TEST(Invariant, SupportedOnItsRectangle) {
  DoubleWellSetup s;
  const auto g = std::make_shared<const Grid>(Grid::aligned(s.dec, 1000));
  const auto op = sgdmc::ulam_assemble(s.fam, g, s.dec);
  for (std::size_t m = 0; m < 2; ++m) {
    const auto r = sgdmc::invariant_measure(op, m, 1e-10, 100000);
    EXPECT_NEAR(r.measure.mass_on(op.partition.mask(static_cast<int>(m))), 1.0, 1e-14);
    EXPECT_LT(r.residual, 1e-9);
  }
  // Mirror symmetry of the objective carries over to the two components.
  const auto a = sgdmc::invariant_measure(op, 0, 1e-12, 100000).measure;
  const auto b = sgdmc::invariant_measure(op, 1, 1e-12, 100000).measure;
  for (std::size_t c = 0; c < a.size(); ++c) EXPECT_NEAR(a[c], b[a.size() - 1 - c], 1e-10);
}

TEST(Invariant, NoConvergenceWithinBudget) {
  DoubleWellSetup s;
  const auto g = std::make_shared<const Grid>(Grid::aligned(s.dec, 1000));
  const auto op = sgdmc::ulam_assemble(s.fam, g, s.dec);
  EXPECT_THROW(sgdmc::invariant_measure(op, 0, 1e-15, 2), sgdmc::NoConvergence);
}

TEST(Basins, PartitionOfUnityAndSymmetry) {
  DoubleWellSetup s;
  const auto g = std::make_shared<const Grid>(Grid::aligned(s.dec, 1000));
  const auto b = sgdmc::basin_functions(s.fam, g, s.dec, 1e-12, 1000000);
  ASSERT_EQ(b.g.size(), 2u);
  EXPECT_LT(b.partition_defect, 1e-9);
  EXPECT_LT(b.residual, 1e-11);
  const std::size_t n = g->size();
  for (std::size_t c = 0; c < n; ++c) {
    EXPECT_GE(b.g[0][c], -1e-12);
    EXPECT_LE(b.g[0][c], 1.0 + 1e-12);
    EXPECT_NEAR(b.g[0][c], b.g[1][n - 1 - c], 1e-9);
  }
  // Far left belongs to T1, far right to T2.
  EXPECT_DOUBLE_EQ(b.g[0][0], 1.0);
  EXPECT_DOUBLE_EQ(b.g[1][n - 1], 1.0);
}

TEST(Basins, SingleRectangleIsConstant) {
  const auto obj = sgdmc::lambda_split(fixtures::double_well(), 2.0);
  const MapFamily fam(obj, 0.0698);
  const auto dec = sgdmc::decompose(obj, 0.0698);
  const auto g = std::make_shared<const Grid>(Grid::aligned(dec, 100));
  const auto b = sgdmc::basin_functions(fam, g, dec, 1e-12, 10);
  ASSERT_EQ(b.g.size(), 1u);
  for (double v : b.g[0]) EXPECT_EQ(v, 1.0);
}

TEST(Mixture, SymmetricStartSplitsEvenly) {
  DoubleWellSetup s;
  const auto g = std::make_shared<const Grid>(Grid::aligned(s.dec, 1000));
  const auto op = sgdmc::ulam_assemble(s.fam, g, s.dec);
  const sgdmc::MetricConfig cfg{op.partition, {{1}, {1}}};
  const auto mu0 = DiscreteMeasure::uniform(g);
  const auto r = sgdmc::limit_mixture(op, mu0, cfg, 5000, 1e-7);
  EXPECT_NEAR(r.coefficients[0], 0.5, 1e-9);
  EXPECT_NEAR(r.coefficients[1], 0.5, 1e-9);
  EXPECT_NEAR(r.mu_star.mass(), 1.0, 1e-12);
  EXPECT_LT(r.distance.back(), 1e-7);
  EXPECT_LT(r.envelope.ratio, 1.0);
  for (std::size_t k = 1; k < r.transient_mass.size(); ++k) EXPECT_LE(r.transient_mass[k], r.transient_mass[k - 1] + 1e-15);
  // Coefficients from the continuous basins agree with the discrete absorption ones.
  const auto basins = sgdmc::basin_functions(s.fam, g, s.dec, 1e-12, 1000000);
  const auto c = sgdmc::mixture_coefficients(basins, mu0);
  EXPECT_NEAR(c[0], r.coefficients[0], 1e-3);
}

TEST(Mixture, PointMassStartGoesToOneSide) {
  DoubleWellSetup s;
  const auto g = std::make_shared<const Grid>(Grid::aligned(s.dec, 400));
  const auto op = sgdmc::ulam_assemble(s.fam, g, s.dec);
  const sgdmc::MetricConfig cfg{op.partition, {{1}, {1}}};
  const auto mu0 = DiscreteMeasure::point_mass(g, 0);
  const auto r = sgdmc::limit_mixture(op, mu0, cfg, 2000, 1e-8);
  EXPECT_DOUBLE_EQ(r.coefficients[0], 1.0);
  EXPECT_DOUBLE_EQ(r.coefficients[1], 0.0);
}

TEST(Envelope, RecoversGeometricSequence) {
  std::vector<double> v;
  for (int k = 0; k < 40; ++k) v.push_back(3.0 * std::pow(0.7, k));
  const auto e = sgdmc::fit_geometric_envelope(v, 10);
  EXPECT_NEAR(e.ratio, 0.7, 1e-12);
  EXPECT_NEAR(e.constant, 3.0, 1e-9);
}
