#ifndef SGDMC_OBJECTIVE_HPP
#define SGDMC_OBJECTIVE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sgdmc/error.hpp"
#include "sgdmc/interval.hpp"
#include "sgdmc/polynomial.hpp"

namespace sgdmc {

inline constexpr double kDefaultRootTol = 1e-12;
/// Roots of different components closer than this are the same point.
inline constexpr double kEndpointTol = 1e-9;

/// Separable objective: summand i is sum_j f_i^{(j)}(x_j), entry (j, i) of the table.
///
/// Construction checks the structural invariants: every summand is nonzero and every
/// nonzero component is coercive (even degree >= 2, positive leading coefficient).
/// Inconsistent optimization is checked later, where the left/right sets are built.
class SeparableObjective {
 public:
  SeparableObjective(std::vector<std::vector<Polynomial>> components) : components_(std::move(components)) {
    if (components_.empty()) throw InvalidInput("objective needs dimension >= 1");
    const std::size_t n = components_.front().size();
    if (n == 0) throw InvalidInput("objective needs at least one summand");
    for (const auto& row : components_)
      if (row.size() != n) throw InvalidInput("every dimension must list the same number of summands");
    for (std::size_t i = 0; i < n; ++i) {
      bool any = false;
      for (const auto& row : components_) any = any || !row[i].is_zero();
      if (!any) throw InvalidInput("summand " + std::to_string(i + 1) + " is identically zero");
    }
    for (std::size_t j = 0; j < components_.size(); ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        const Polynomial& p = components_[j][i];
        if (p.is_zero()) continue;
        if (p.degree() < 2 || p.degree() % 2 != 0 || p.leading() <= 0.0)
          throw NonCoercive("component (dimension " + std::to_string(j + 1) + ", summand " +
                            std::to_string(i + 1) + ") is not coercive");
      }
    }
  }

  std::size_t dimension() const { return components_.size(); }
  std::size_t summands() const { return components_.front().size(); }
  const Polynomial& component(std::size_t j, std::size_t i) const { return components_[j][i]; }
  const std::vector<Polynomial>& dimension_components(std::size_t j) const { return components_[j]; }

  /// h^{(j)} / n: the part of F depending on x_j.
  Polynomial mean_component(std::size_t j) const {
    Polynomial sum;
    for (const auto& p : components_[j]) sum = sum + p;
    return (1.0 / static_cast<double>(summands())) * sum;
  }

  double value(std::span<const double> x) const {
    double v = 0.0;
    for (std::size_t j = 0; j < dimension(); ++j) v += mean_component(j)(x[j]);
    return v;
  }

 private:
  std::vector<std::vector<Polynomial>> components_;
};

/// Critical points of every nonzero component, canonicalized per dimension.
///
/// `points[j]` merges the roots of all components of dimension j (within kEndpointTol);
/// `root_index[j][i]` lists positions into `points[j]` that are roots of f_i^{(j)}'.
struct CriticalPointReport {
  std::vector<std::vector<std::vector<double>>> roots;
  std::vector<std::vector<double>> points;
  std::vector<std::vector<std::vector<std::size_t>>> root_index;

  Interval state_interval(std::size_t j) const { return {points[j].front(), points[j].back()}; }
};

inline CriticalPointReport critical_point_report(const SeparableObjective& obj,
                                                 double root_tol = kDefaultRootTol) {
  CriticalPointReport rep;
  const std::size_t d = obj.dimension();
  const std::size_t n = obj.summands();
  rep.roots.assign(d, std::vector<std::vector<double>>(n));
  rep.points.resize(d);
  rep.root_index.assign(d, std::vector<std::vector<std::size_t>>(n));
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < n; ++i) {
      const Polynomial& p = obj.component(j, i);
      if (p.is_zero()) continue;
      rep.roots[j][i] = critical_points(p, root_tol);
      for (double r : rep.roots[j][i]) all.emplace_back(r, i);
    }
    std::sort(all.begin(), all.end());
    // Cluster nearby roots into one canonical point (cluster mean).
    std::size_t k = 0;
    while (k < all.size()) {
      std::size_t e = k + 1;
      double sum = all[k].first;
      while (e < all.size() && all[e].first - all[e - 1].first <= kEndpointTol) sum += all[e++].first;
      const std::size_t idx = rep.points[j].size();
      rep.points[j].push_back(sum / static_cast<double>(e - k));
      for (std::size_t t = k; t < e; ++t) {
        auto& lst = rep.root_index[j][all[t].second];
        if (lst.empty() || lst.back() != idx) lst.push_back(idx);
      }
      k = e;
    }
  }
  return rep;
}

/// I^{(j)} = [min C^{(j)}, max C^{(j)}] for every dimension.
inline std::vector<Interval> state_space(const SeparableObjective& obj, const CriticalPointReport& report) {
  std::vector<Interval> I;
  for (std::size_t j = 0; j < obj.dimension(); ++j) {
    if (report.points[j].empty())
      throw EmptyCriticalSet("dimension " + std::to_string(j + 1) + " has no nonzero component");
    I.push_back(report.state_interval(j));
  }
  return I;
}

/// max over (j, i) of max over I^{(j)} of |f_i^{(j)''}|.
inline double lipschitz_constant(const SeparableObjective& obj, std::span<const Interval> I) {
  double K = 0.0;
  for (std::size_t j = 0; j < obj.dimension(); ++j) {
    for (const Polynomial& p : obj.dimension_components(j)) {
      if (p.is_zero()) continue;
      const Polynomial second = p.derivative().derivative();
      std::vector<double> probes{I[j].lo, I[j].hi};
      const Polynomial third = second.derivative();
      if (!third.is_zero())
        for (double c : real_roots(third))
          if (I[j].contains_closed(c)) probes.push_back(c);
      for (double x : probes) K = std::max(K, std::abs(second(x)));
    }
  }
  return K;
}

struct StepConfig {
  double eta = 0.0;
  double lipschitz_K = 0.0;
  double eta_max = 0.0;
};

inline StepConfig make_step_config(double eta, double K) {
  if (!(K > 0.0)) throw InvalidInput("Lipschitz constant must be positive");
  StepConfig cfg{eta, K, 1.0 / K};
  if (!(eta > 0.0) || !(eta < cfg.eta_max)) throw StepSizeTooLarge(eta, cfg.eta_max);
  return cfg;
}

/// f1 = F + lambda x, f2 = F - lambda x (one dimension, two summands).
inline SeparableObjective lambda_split(const Polynomial& F, double lambda) {
  if (F.is_zero() || F.degree() < 2 || F.degree() % 2 != 0 || F.leading() <= 0.0)
    throw NonCoercive("objective polynomial is not coercive");
  if (!(lambda > 0.0)) throw InvalidInput("lambda must be positive");
  const Polynomial shift{0.0, lambda};
  return SeparableObjective({{F + shift, F - shift}});
}

}  // namespace sgdmc

#endif  // SGDMC_OBJECTIVE_HPP
