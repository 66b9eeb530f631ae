#ifndef SGDMC_DIFFUSION_HPP
#define SGDMC_DIFFUSION_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sgdmc/error.hpp"
#include "sgdmc/grid.hpp"
#include "sgdmc/objective.hpp"

namespace sgdmc {

/// Polynomials of the diffusion approximation for a one-dimensional objective.
struct DiffusionPolynomials {
  Polynomial F;
  Polynomial Phi;  // F + (eta/4) F'^2
  Polynomial u;    // Phi'
  Polynomial D;    // (1/n) sum f_i'^2 - F'^2
};

inline DiffusionPolynomials diffusion_polynomials(const SeparableObjective& obj, double eta) {
  if (obj.dimension() != 1) throw InvalidInput("the diffusion approximation needs a one-dimensional objective");
  DiffusionPolynomials p;
  p.F = obj.mean_component(0);
  const Polynomial dF = p.F.derivative();
  p.Phi = p.F + (eta / 4.0) * (dF * dF);
  p.u = p.Phi.derivative();
  Polynomial sq;
  for (const Polynomial& f : obj.dimension_components(0)) {
    const Polynomial df = f.derivative();
    sq = sq + df * df;
  }
  p.D = (1.0 / static_cast<double>(obj.summands())) * sq - dF * dF;
  return p;
}

struct DriftDiffusion {
  std::vector<double> x;
  std::vector<double> Phi;
  std::vector<double> u;
  std::vector<double> D;
};

inline DriftDiffusion drift_and_diffusion(const SeparableObjective& obj, double eta, const std::vector<double>& xs) {
  const auto p = diffusion_polynomials(obj, eta);
  DriftDiffusion out;
  out.x = xs;
  for (double x : xs) {
    out.Phi.push_back(p.Phi(x));
    out.u.push_back(p.u(x));
    out.D.push_back(p.D(x));
  }
  return out;
}

/// Points where D < tol.
inline std::vector<double> vanishing_points(const std::vector<double>& xs, const std::vector<double>& D,
                                            double tol = 1e-12) {
  std::vector<double> out;
  for (std::size_t k = 0; k < xs.size(); ++k)
    if (D[k] < tol) out.push_back(xs[k]);
  return out;
}

enum class PotentialMethod { automatic, closed_form, quadrature };

struct DiffusionProfile {
  std::vector<double> x;
  std::vector<double> Phi;
  std::vector<double> u;
  std::vector<double> D;
  std::vector<double> V;
  std::vector<double> rho;
  double Z = 0.0;
  double x_ref = 0.0;               // V(x_ref) = 0, the grid minimizer of Phi
  double truncation_estimate = 0.0; // Laplace-type estimate of the mass outside the grid
  bool closed_form = false;
};

namespace detail {

// 5-point Gauss-Legendre on [a, b].
template <class Fn>
double gauss5(Fn&& f, double a, double b) {
  static constexpr std::array<double, 5> node{0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                              0.9061798459386640};
  static constexpr std::array<double, 5> weight{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                                0.2369268850561891, 0.2369268850561891};
  const double h = 0.5 * (b - a);
  const double m = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t k = 0; k < 5; ++k) s += weight[k] * f(m + h * node[k]);
  return h * s;
}

}  // namespace detail

/// Stationary density rho* = exp(-(2/eta) V) / Z on the sorted points xs, with
/// V' = (u + (eta/2) D') / D. When D is constant this is V = Phi / D (the lambda-splitting
/// closed form); otherwise V is integrated cell by cell with Gauss-Legendre.
/// Z is the trapezoid integral over xs.
inline DiffusionProfile stationary_density(const SeparableObjective& obj, double eta, const std::vector<double>& xs,
                                           PotentialMethod method = PotentialMethod::automatic,
                                           double d_tol = 1e-12) {
  if (xs.size() < 2) throw InvalidInput("stationary_density needs at least two points");
  const auto p = diffusion_polynomials(obj, eta);
  DiffusionProfile out;
  out.x = xs;
  for (double x : xs) {
    out.Phi.push_back(p.Phi(x));
    out.u.push_back(p.u(x));
    out.D.push_back(p.D(x));
  }
  // Singularities: D below tol at a grid point or anywhere in between (interior minima of D).
  std::vector<double> bad = vanishing_points(xs, out.D, d_tol);
  if (!p.D.is_zero() && p.D.degree() >= 1)
    for (double c : real_roots(p.D.derivative()))
      if (c > xs.front() && c < xs.back() && p.D(c) < d_tol) bad.push_back(c);
  if (p.D.is_zero() && bad.empty()) bad = xs;
  if (!bad.empty()) {
    std::sort(bad.begin(), bad.end());
    throw SingularDiffusion("diffusion coefficient vanishes on the state space", bad);
  }

  const std::size_t iref = static_cast<std::size_t>(std::min_element(out.Phi.begin(), out.Phi.end()) - out.Phi.begin());
  out.x_ref = xs[iref];
  const bool constant_D = p.D.degree() == 0;
  out.closed_form = method == PotentialMethod::closed_form || (method == PotentialMethod::automatic && constant_D);
  if (out.closed_form && !constant_D) throw InvalidInput("closed-form potential needs a constant diffusion coefficient");

  out.V.assign(xs.size(), 0.0);
  if (out.closed_form) {
    const double D0 = p.D.coeff(0);
    for (std::size_t k = 0; k < xs.size(); ++k) out.V[k] = (out.Phi[k] - out.Phi[iref]) / D0;
  } else {
    const Polynomial dD = p.D.derivative();
    auto dV = [&](double x) { return (p.u(x) + 0.5 * eta * dD(x)) / p.D(x); };
    for (std::size_t k = iref + 1; k < xs.size(); ++k) out.V[k] = out.V[k - 1] + detail::gauss5(dV, xs[k - 1], xs[k]);
    for (std::size_t k = iref; k-- > 0;) out.V[k] = out.V[k + 1] - detail::gauss5(dV, xs[k], xs[k + 1]);
  }

  const double beta = 2.0 / eta;
  std::vector<double> e(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) e[k] = std::exp(-beta * out.V[k]);
  double Z = 0.0;
  for (std::size_t k = 1; k < xs.size(); ++k) Z += 0.5 * (e[k] + e[k - 1]) * (xs[k] - xs[k - 1]);
  out.Z = Z;
  for (double v : e) out.rho.push_back(v / Z);

  // Tail beyond each end: rho(end) / (beta |V'(end)|), the leading Laplace term.
  const Polynomial dD = p.D.derivative();
  auto slope = [&](double x) { return std::abs((p.u(x) + 0.5 * eta * dD(x)) / p.D(x)); };
  for (std::size_t k : {std::size_t{0}, xs.size() - 1}) {
    const double s = beta * slope(xs[k]);
    out.truncation_estimate += s > 0.0 ? out.rho[k] / s : kInf;
  }
  return out;
}

/// Uniformly spaced points on [a, b] including both ends.
inline std::vector<double> linspace(double a, double b, std::size_t count) {
  std::vector<double> xs(count);
  for (std::size_t k = 0; k < count; ++k)
    xs[k] = count == 1 ? a : a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1);
  if (count > 1) xs.back() = b;
  return xs;
}

/// rho* as cell weights on a one-dimensional grid (density at centers times width, normalized).
inline DiscreteMeasure diffusion_measure(const SeparableObjective& obj, double eta, std::shared_ptr<const Grid> grid) {
  if (grid->dimension() != 1) throw GridMismatch("diffusion_measure needs a one-dimensional grid");
  std::vector<double> centers;
  for (std::size_t k = 0; k < grid->cells(0); ++k) centers.push_back(grid->center(0, k));
  if (centers.size() < 2) throw InvalidInput("grid too coarse");
  const auto prof = stationary_density(obj, eta, centers);
  std::vector<double> w(centers.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = prof.rho[k] * grid->cell_extent(0, k).length();
  DiscreteMeasure m(std::move(grid), std::move(w));
  m.normalize();
  return m;
}

}  // namespace sgdmc

#endif  // SGDMC_DIFFUSION_HPP
