#ifndef SGDMC_ABSORBING_HPP
#define SGDMC_ABSORBING_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sgdmc/error.hpp"
#include "sgdmc/interval.hpp"
#include "sgdmc/objective.hpp"

namespace sgdmc {

/// Closed absorbing interval [l, r] of one dimension.
struct AbsorbingInterval {
  double l = 0.0;
  double r = 0.0;
  std::size_t dimension = 0;
  std::size_t index = 0;  // 0-based position within its dimension

  Interval interval() const { return {l, r}; }
};

/// Product rectangle T_m; `index[j]` selects the absorbing interval of dimension j.
struct Rectangle {
  std::vector<std::size_t> index;
  std::vector<Interval> box;

  bool contains(std::span<const double> x, double tol = 0.0) const {
    for (std::size_t j = 0; j < box.size(); ++j)
      if (!box[j].contains_closed(x[j], tol)) return false;
    return true;
  }
  bool contains_interior(std::span<const double> x) const {
    for (std::size_t j = 0; j < box.size(); ++j)
      if (!box[j].contains_open(x[j])) return false;
    return true;
  }
};

struct Decomposition {
  std::vector<Interval> I;
  std::vector<std::vector<AbsorbingInterval>> intervals;  // per dimension
  std::vector<Rectangle> rectangles;
  std::vector<std::size_t> counts;
  bool unique = false;

  std::size_t dimension() const { return I.size(); }

  /// Rectangle containing x (closed), if any. Points not in any rectangle belong to B.
  std::optional<std::size_t> rectangle_containing(std::span<const double> x, double tol = 0.0) const {
    for (std::size_t m = 0; m < rectangles.size(); ++m)
      if (rectangles[m].contains(x, tol)) return m;
    return std::nullopt;
  }
  bool in_transient(std::span<const double> x) const { return !rectangle_containing(x).has_value(); }

  /// Absorbing interval of dimension j containing s (closed), if any.
  std::optional<std::size_t> interval_containing(std::size_t j, double s, double tol = 0.0) const {
    for (const auto& t : intervals[j])
      if (t.interval().contains_closed(s, tol)) return t.index;
    return std::nullopt;
  }
};

namespace detail {

// Alternating elements of the real line cut at the canonical critical points:
// element 2k is the open gap left of point k, element 2k+1 is point k itself.
struct SignComplex {
  std::vector<double> points;
  std::vector<bool> in_left;
  std::vector<bool> in_right;
};

inline SignComplex sign_complex(const SeparableObjective& obj, std::size_t j, const CriticalPointReport& rep) {
  SignComplex sc;
  sc.points = rep.points[j];
  const std::size_t P = sc.points.size();
  const std::size_t n = obj.summands();
  std::vector<Polynomial> deriv;
  std::vector<std::size_t> nonzero;
  for (std::size_t i = 0; i < n; ++i) {
    deriv.push_back(obj.component(j, i).derivative());
    if (!obj.component(j, i).is_zero()) nonzero.push_back(i);
  }
  if (nonzero.size() < 2)
    throw AssumptionA5Violated("dimension " + std::to_string(j + 1) +
                               " needs at least two nonzero components");

  auto probe = [&](std::size_t e) {
    if (e % 2 == 0) {
      const std::size_t k = e / 2;
      if (P == 0) return 0.0;
      if (k == 0) return sc.points.front() - 1.0;
      if (k == P) return sc.points.back() + 1.0;
      return 0.5 * (sc.points[k - 1] + sc.points[k]);
    }
    return sc.points[e / 2];
  };

  for (std::size_t e = 0; e < 2 * P + 1; ++e) {
    bool left = false;
    bool right = false;
    const double x = probe(e);
    for (std::size_t i : nonzero) {
      if (e % 2 == 1) {
        const auto& idx = rep.root_index[j][i];
        if (std::find(idx.begin(), idx.end(), e / 2) != idx.end()) continue;  // f_i'(x) = 0
      }
      const double v = deriv[i](x);
      left = left || v > 0.0;
      right = right || v < 0.0;
    }
    if (!left && !right)
      throw AssumptionA5Violated("dimension " + std::to_string(j + 1) +
                                 ": all component derivatives vanish near x=" + std::to_string(x));
    sc.in_left.push_back(left);
    sc.in_right.push_back(right);
  }
  return sc;
}

// Maximal runs of elements with the flag set, as open intervals between breakpoints.
inline IntervalUnion runs(const SignComplex& sc, const std::vector<bool>& flag) {
  std::vector<Interval> parts;
  const std::size_t E = flag.size();
  std::size_t e = 0;
  auto edge = [&](std::size_t elem, bool start) {
    // A run starting at gap 2k is bounded on the left by point k-1.
    if (start) return elem == 0 ? -kInf : sc.points[elem / 2 - 1];
    return elem == E - 1 ? kInf : sc.points[elem / 2];
  };
  while (e < E) {
    if (!flag[e]) {
      ++e;
      continue;
    }
    const std::size_t s = e;
    while (e + 1 < E && flag[e + 1]) ++e;
    // Openness: a run begins and ends at a gap element.
    parts.push_back({edge(s, true), edge(e, false)});
    ++e;
  }
  return IntervalUnion(std::move(parts));
}

}  // namespace detail

/// L = union of {f_i' > 0}, R = union of {f_i' < 0} for dimension j.
inline std::pair<IntervalUnion, IntervalUnion> left_right_sets(const SeparableObjective& obj, std::size_t j,
                                                               const CriticalPointReport& report) {
  const auto sc = detail::sign_complex(obj, j, report);
  return {detail::runs(sc, sc.in_left), detail::runs(sc, sc.in_right)};
}

inline std::pair<IntervalUnion, IntervalUnion> left_right_sets(const SeparableObjective& obj, std::size_t j) {
  return left_right_sets(obj, j, critical_point_report(obj));
}

/// Components (l, r) of L n R with l on the boundary of L and r on the boundary of R.
inline std::vector<AbsorbingInterval> absorbing_intervals(const IntervalUnion& L, const IntervalUnion& R,
                                                          std::size_t dimension = 0) {
  std::vector<AbsorbingInterval> out;
  const IntervalUnion both = L.intersect(R);
  for (const Interval& c : both.parts()) {
    if (!std::isfinite(c.lo) || !std::isfinite(c.hi)) continue;
    if (L.on_boundary(c.lo, kEndpointTol) && R.on_boundary(c.hi, kEndpointTol))
      out.push_back({c.lo, c.hi, dimension, out.size()});
  }
  if (out.empty()) throw InternalError("no absorbing interval found; contradicts the L/R construction");
  return out;
}

/// True iff every dimension has a nonzero component with exactly one critical point.
inline bool uniqueness_check(const SeparableObjective& obj, const CriticalPointReport& report) {
  for (std::size_t j = 0; j < obj.dimension(); ++j) {
    bool found = false;
    for (std::size_t i = 0; i < obj.summands(); ++i)
      found = found || (!obj.component(j, i).is_zero() && report.roots[j][i].size() == 1);
    if (!found) return false;
  }
  return true;
}

inline bool uniqueness_check(const SeparableObjective& obj) {
  return uniqueness_check(obj, critical_point_report(obj));
}

/// Step-size independent part of the decomposition. Runs the structural checks
/// (endpoint classification, local-minimum containment) but not the eta bound.
inline Decomposition decompose(const SeparableObjective& obj, const CriticalPointReport& report) {
  Decomposition dec;
  dec.I = state_space(obj, report);
  const std::size_t d = obj.dimension();
  dec.intervals.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto [L, R] = left_right_sets(obj, j, report);
    dec.intervals[j] = absorbing_intervals(L, R, j);
    const Polynomial dF = obj.mean_component(j).derivative();
    for (const auto& t : dec.intervals[j]) {
      if (!(R.contains(t.l) && !L.contains(t.l) && L.contains(t.r) && !R.contains(t.r)))
        throw InternalError("endpoint classification failed for an absorbing interval");
      if (!(dF(t.l) < 0.0 && dF(t.r) > 0.0))
        throw InternalError("absorbing interval does not enclose a local minimum");
      if (!dec.I[j].contains_closed(t.l, kEndpointTol) || !dec.I[j].contains_closed(t.r, kEndpointTol))
        throw InternalError("absorbing interval leaves the state space");
    }
    dec.counts.push_back(dec.intervals[j].size());
  }
  // Enumerate the product index set in lexicographic order (last dimension fastest).
  std::size_t total = 1;
  for (std::size_t c : dec.counts) total *= c;
  for (std::size_t t = 0; t < total; ++t) {
    Rectangle rect;
    rect.index.assign(d, 0);
    std::size_t rest = t;
    for (std::size_t j = d; j-- > 0;) {
      rect.index[j] = rest % dec.counts[j];
      rest /= dec.counts[j];
    }
    for (std::size_t j = 0; j < d; ++j) rect.box.push_back(dec.intervals[j][rect.index[j]].interval());
    dec.rectangles.push_back(std::move(rect));
  }
  dec.unique = uniqueness_check(obj, report);
  if (dec.unique && dec.rectangles.size() != 1)
    throw InternalError("uniqueness criterion holds but more than one rectangle was built");
  return dec;
}

/// Checks phi_i(l) >= l and phi_i(r) <= r for every map and absorbing interval.
inline void check_positive_invariance(const SeparableObjective& obj, const Decomposition& dec, double eta,
                                      double tol = 1e-9) {
  for (std::size_t j = 0; j < dec.dimension(); ++j) {
    for (std::size_t i = 0; i < obj.summands(); ++i) {
      const Polynomial dp = obj.component(j, i).derivative();
      auto phi = [&](double s) { return s - eta * dp(s); };
      for (const auto& t : dec.intervals[j]) {
        if (phi(t.l) < t.l - tol)
          throw InvarianceCheckFailed("map " + std::to_string(i + 1) + " pushes the left corner of T" +
                                      std::to_string(t.index + 1) + " in dimension " + std::to_string(j + 1) +
                                      " outside");
        if (phi(t.r) > t.r + tol)
          throw InvarianceCheckFailed("map " + std::to_string(i + 1) + " pushes the right corner of T" +
                                      std::to_string(t.index + 1) + " in dimension " + std::to_string(j + 1) +
                                      " outside");
      }
    }
  }
}

/// Full decomposition for step size eta; rejects eta >= 1/K.
inline Decomposition decompose(const SeparableObjective& obj, double eta) {
  const auto report = critical_point_report(obj);
  auto dec = decompose(obj, report);
  const double K = lipschitz_constant(obj, dec.I);
  make_step_config(eta, K);
  check_positive_invariance(obj, dec, eta);
  return dec;
}

}  // namespace sgdmc

#endif  // SGDMC_ABSORBING_HPP
