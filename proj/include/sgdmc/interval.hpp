#ifndef SGDMC_INTERVAL_HPP
#define SGDMC_INTERVAL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

namespace sgdmc {

using Point = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Closed interval [lo, hi] (or open, depending on the container that owns it).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains_closed(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
  bool contains_open(double x) const { return x > lo && x < hi; }
  bool operator==(const Interval&) const = default;
};

/// Sorted disjoint union of open intervals; endpoints may be infinite.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  explicit IntervalUnion(std::vector<Interval> parts) : parts_(std::move(parts)) {
    std::sort(parts_.begin(), parts_.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  }

  const std::vector<Interval>& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }

  bool contains(double x) const { return component_containing(x).has_value(); }

  std::optional<Interval> component_containing(double x) const {
    auto it = std::upper_bound(parts_.begin(), parts_.end(), x,
                               [](double v, const Interval& iv) { return v < iv.lo; });
    if (it == parts_.begin()) return std::nullopt;
    --it;
    if (it->contains_open(x)) return *it;
    return std::nullopt;
  }

  /// True when x is an endpoint of some component and not inside any.
  bool on_boundary(double x, double tol) const {
    if (contains(x)) return false;
    return std::any_of(parts_.begin(), parts_.end(), [&](const Interval& iv) {
      return std::abs(iv.lo - x) <= tol || std::abs(iv.hi - x) <= tol;
    });
  }

  /// Component-wise intersection; the result is again a sorted disjoint union.
  IntervalUnion intersect(const IntervalUnion& other) const {
    std::vector<Interval> out;
    std::size_t a = 0;
    std::size_t b = 0;
    while (a < parts_.size() && b < other.parts_.size()) {
      const double lo = std::max(parts_[a].lo, other.parts_[b].lo);
      const double hi = std::min(parts_[a].hi, other.parts_[b].hi);
      if (lo < hi) out.push_back({lo, hi});
      if (parts_[a].hi < other.parts_[b].hi) {
        ++a;
      } else {
        ++b;
      }
    }
    return IntervalUnion(std::move(out));
  }

  bool operator==(const IntervalUnion&) const = default;

 private:
  std::vector<Interval> parts_;
};

}  // namespace sgdmc

#endif  // SGDMC_INTERVAL_HPP
