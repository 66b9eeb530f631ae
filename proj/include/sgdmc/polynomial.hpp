#ifndef SGDMC_POLYNOMIAL_HPP
#define SGDMC_POLYNOMIAL_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "sgdmc/error.hpp"

namespace sgdmc {

/// Univariate polynomial with real coefficients in ascending degree.
/// Trailing zeros are trimmed, so the zero polynomial has no coefficients.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) { trim(); }
  Polynomial(std::initializer_list<double> coeffs) : coeffs_(coeffs) { trim(); }

  static Polynomial monomial(double c, int k) {
    std::vector<double> v(static_cast<std::size_t>(k) + 1, 0.0);
    v.back() = c;
    return Polynomial(std::move(v));
  }

  bool is_zero() const { return coeffs_.empty(); }
  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  double leading() const { return coeffs_.empty() ? 0.0 : coeffs_.back(); }
  std::span<const double> coeffs() const { return coeffs_; }
  double coeff(int k) const {
    return k >= 0 && k < static_cast<int>(coeffs_.size()) ? coeffs_[static_cast<std::size_t>(k)]
                                                          : 0.0;
  }

  double operator()(double x) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  /// Sum of |c_k x^k|: the rounding scale of an evaluation at x.
  double magnitude_at(double x) const {
    double acc = 0.0;
    const double ax = std::abs(x);
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * ax + std::abs(*it);
    return acc;
  }

  Polynomial derivative() const {
    if (coeffs_.size() <= 1) return {};
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
    return Polynomial(std::move(d));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
    for (std::size_t k = 0; k < a.coeffs_.size(); ++k) c[k] += a.coeffs_[k];
    for (std::size_t k = 0; k < b.coeffs_.size(); ++k) c[k] += b.coeffs_[k];
    return Polynomial(std::move(c));
  }
  friend Polynomial operator*(double s, const Polynomial& p) {
    std::vector<double> c(p.coeffs_);
    for (double& v : c) v *= s;
    return Polynomial(std::move(c));
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-1.0) * b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<double> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return Polynomial(std::move(c));
  }

  bool operator==(const Polynomial&) const = default;

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
  }

  std::vector<double> coeffs_;
};

inline double eval_component(const Polynomial& p, double x) { return p(x); }

inline Polynomial derivative(const Polynomial& p) { return p.derivative(); }

namespace detail {

// Bisection of a sign change of q on [u, v]; q is monotone there.
inline double bisect_root(const Polynomial& q, double u, double v, double tol) {
  double fu = q(u);
  for (int it = 0; it < 200 && v - u > tol; ++it) {
    const double m = 0.5 * (u + v);
    const double fm = q(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fu < 0.0)) {
      u = m;
      fu = fm;
    } else {
      v = m;
    }
  }
  return 0.5 * (u + v);
}

// Roots of q inside [lo, hi], assuming q has no root of q' in (lo, hi) except those listed.
inline std::vector<double> roots_on(const Polynomial& q, double lo, double hi, double tol) {
  std::vector<double> roots;
  if (q.is_zero()) throw DegenerateDerivative("root search on the zero polynomial");
  if (q.degree() == 0) return roots;
  if (q.degree() == 1) {
    const double r = -q.coeff(0) / q.coeff(1);
    if (r >= lo && r <= hi) roots.push_back(r + 0.0);
    return roots;
  }
  // q is monotone between consecutive critical points, so each piece has at most one root.
  std::vector<double> breaks{lo};
  for (double c : roots_on(q.derivative(), lo, hi, tol))
    if (c > lo && c < hi) breaks.push_back(c);
  breaks.push_back(hi);

  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double u = breaks[k];
    const double v = breaks[k + 1];
    const double fu = q(u);
    const double fv = q(v);
    if (fu == 0.0) roots.push_back(u);
    if ((fu < 0.0 && fv > 0.0) || (fu > 0.0 && fv < 0.0)) roots.push_back(bisect_root(q, u, v, tol));
  }
  if (q(hi) == 0.0) roots.push_back(hi);

  // Even-multiplicity roots: q touches zero at an interior critical point without changing sign.
  for (std::size_t k = 1; k + 1 < breaks.size(); ++k) {
    const double c = breaks[k];
    if (std::abs(q(c)) <= 1e-12 * q.magnitude_at(c)) roots.push_back(c);
  }

  std::sort(roots.begin(), roots.end());
  std::vector<double> merged;
  for (double r : roots) {
    if (!merged.empty() && r - merged.back() <= std::max(10.0 * tol, 1e-9)) continue;
    merged.push_back(r + 0.0);  // no negative zero
  }
  return merged;
}

}  // namespace detail

/// Cauchy bound: every real root of q lies in [-bound, bound].
inline double cauchy_bound(const Polynomial& q) {
  double m = 0.0;
  for (int k = 0; k < q.degree(); ++k) m = std::max(m, std::abs(q.coeff(k) / q.leading()));
  return 1.0 + m;
}

/// All real roots of q, each reported once, sorted.
inline std::vector<double> real_roots(const Polynomial& q, double tol = 1e-12) {
  if (q.is_zero()) throw DegenerateDerivative("real_roots of the zero polynomial");
  if (q.degree() == 0) return {};
  const double b = cauchy_bound(q);
  return detail::roots_on(q, -b, b, tol);
}

/// Real critical points of p (roots of p').
inline std::vector<double> critical_points(const Polynomial& p, double root_tol = 1e-12) {
  const Polynomial dp = p.derivative();
  if (dp.is_zero()) throw DegenerateDerivative("derivative is identically zero");
  return real_roots(dp, root_tol);
}

}  // namespace sgdmc

#endif  // SGDMC_POLYNOMIAL_HPP
