// Objectives used across the test suites.
#ifndef SGDMC_TESTS_FIXTURES_HPP
#define SGDMC_TESTS_FIXTURES_HPP

#include "sgdmc/sgdmc.hpp"

namespace fixtures {

using sgdmc::Polynomial;
using sgdmc::SeparableObjective;

/// (1 - x^2)^2 / 4
inline Polynomial double_well() { return Polynomial{0.25, 0.0, -0.5, 0.0, 0.25}; }

/// Eighth-order objective with F' vanishing at 0, +-1 and +-1.35.
inline Polynomial eighth_order() {
  const double c8 = 0.78;
  const double c6 = -8.0 * c8 * 2.8225 / 6.0;
  const double c4 = 2.0 * c8 * 1.8225;
  return Polynomial{0.0, 0.0, 0.0, 0.0, c4, 0.0, c6, 0.0, c8};
}

/// f1 = (x - 1)^2, f2 = (x + 1)^2
inline SeparableObjective bernoulli() { return SeparableObjective({{Polynomial{1, -2, 1}, Polynomial{1, 2, 1}}}); }

/// f1 = x1^2 + (x2 - 1)^2, f2 = (x1 - 1)^2 + x2^2
inline SeparableObjective crossed_2d() {
  return SeparableObjective({{Polynomial{0, 0, 1}, Polynomial{1, -2, 1}}, {Polynomial{1, -2, 1}, Polynomial{0, 0, 1}}});
}

/// Two independent lambda-split double wells, one per coordinate.
inline SeparableObjective double_well_2d(double lambda1, double lambda2) {
  const Polynomial F = double_well();
  return SeparableObjective({{F + Polynomial{0, lambda1}, F - Polynomial{0, lambda1}},
                             {F + Polynomial{0, lambda2}, F - Polynomial{0, lambda2}}});
}

}  // namespace fixtures

#endif  // SGDMC_TESTS_FIXTURES_HPP
