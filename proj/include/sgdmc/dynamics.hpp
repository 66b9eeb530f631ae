#ifndef SGDMC_DYNAMICS_HPP
#define SGDMC_DYNAMICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sgdmc/absorbing.hpp"
#include "sgdmc/error.hpp"
#include "sgdmc/interval.hpp"
#include "sgdmc/objective.hpp"

namespace sgdmc {

/// The SGD maps phi_i(x) = x - eta grad f_i(x), componentwise for a separable objective.
class MapFamily {
 public:
  /// Requires 0 < eta < 1/K.
  MapFamily(SeparableObjective obj, double eta) : MapFamily(std::move(obj), eta, true) {}

  /// Skips the step-size check (e.g. eta = 0 gives the identity maps).
  static MapFamily unchecked(SeparableObjective obj, double eta) { return MapFamily(std::move(obj), eta, false); }

  const SeparableObjective& objective() const { return obj_; }
  double eta() const { return eta_; }
  double lipschitz_K() const { return K_; }
  double eta_max() const { return 1.0 / K_; }
  const std::vector<Interval>& state_space() const { return I_; }
  const CriticalPointReport& report() const { return report_; }
  std::size_t dimension() const { return obj_.dimension(); }
  std::size_t size() const { return obj_.summands(); }

  /// phi_i^{(j)}(s) without state-space checks.
  double component(std::size_t i, std::size_t j, double s) const { return s - eta_ * deriv_[j][i](s); }

 private:
  MapFamily(SeparableObjective obj, double eta, bool check) : obj_(std::move(obj)), eta_(eta) {
    report_ = critical_point_report(obj_);
    I_ = sgdmc::state_space(obj_, report_);
    K_ = lipschitz_constant(obj_, I_);
    if (check) make_step_config(eta_, K_);
    deriv_.resize(obj_.dimension());
    for (std::size_t j = 0; j < obj_.dimension(); ++j)
      for (std::size_t i = 0; i < obj_.summands(); ++i) deriv_[j].push_back(obj_.component(j, i).derivative());
  }

  SeparableObjective obj_;
  double eta_;
  CriticalPointReport report_;
  std::vector<Interval> I_;
  double K_ = 0.0;
  std::vector<std::vector<Polynomial>> deriv_;
};

/// Sequence of 0-based map indices; applied first-to-last.
struct Path {
  std::vector<std::size_t> indices;

  std::size_t length() const { return indices.size(); }
  bool operator==(const Path&) const = default;
};

/// The path "p after q": q's maps run first.
inline Path concat(const Path& p, const Path& q) {
  Path out = q;
  out.indices.insert(out.indices.end(), p.indices.begin(), p.indices.end());
  return out;
}

inline constexpr double kStateTol = 1e-12;

inline Point apply_map(const MapFamily& fam, std::size_t i, std::span<const double> x) {
  const auto& I = fam.state_space();
  Point y(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double tol = kStateTol * std::max(1.0, std::abs(x[j]));
    if (!I[j].contains_closed(x[j], tol))
      throw OutOfStateSpace("coordinate " + std::to_string(j + 1) + " = " + std::to_string(x[j]) +
                            " lies outside the state space");
    y[j] = std::clamp(fam.component(i, j, x[j]), I[j].lo, I[j].hi);
  }
  return y;
}

inline Point apply_path(const MapFamily& fam, const Path& p, std::span<const double> x) {
  Point y(x.begin(), x.end());
  for (std::size_t i : p.indices) y = apply_map(fam, i, y);
  return y;
}

/// Path composition restricted to one coordinate.
inline double apply_path_component(const MapFamily& fam, const Path& p, std::size_t j, double s) {
  for (std::size_t i : p.indices) s = fam.component(i, j, s);
  return s;
}

enum class Direction { min, max };

/// Greedy extreme step and its (lowest) argument.
inline std::pair<double, std::size_t> extremal_step(const MapFamily& fam, std::size_t j, double s, Direction dir) {
  std::size_t best = 0;
  double v = fam.component(0, j, s);
  for (std::size_t i = 1; i < fam.size(); ++i) {
    const double w = fam.component(i, j, s);
    if (dir == Direction::min ? w < v : w > v) {
      v = w;
      best = i;
    }
  }
  return {v, best};
}

/// m_0 = x, m_{k+1} = min_i (max_i) phi_i^{(j)}(m_k). Since every phi_i^{(j)} is increasing,
/// m_k is the extreme of phi_p(x) over all n^k paths p of length k.
inline std::vector<double> extremal_envelope(const MapFamily& fam, std::size_t j, double x, std::size_t ell,
                                             Direction dir) {
  std::vector<double> m{x};
  m.reserve(ell + 1);
  for (std::size_t k = 0; k < ell; ++k) m.push_back(extremal_step(fam, j, m.back(), dir).first);
  return m;
}

/// Greedy path of the given length realizing the envelope from x.
inline Path extremal_path(const MapFamily& fam, std::size_t j, double x, std::size_t ell, Direction dir) {
  Path p;
  for (std::size_t k = 0; k < ell; ++k) {
    auto [v, i] = extremal_step(fam, j, x, dir);
    p.indices.push_back(i);
    x = v;
  }
  return p;
}

/// Two equal-length paths separating the images of a rectangle in the alpha order.
struct SplittingCertificate {
  Path path_lo;
  Path path_hi;
  Point x0;
  std::vector<int> alpha;
  std::size_t ell = 0;
};

struct CertificateSearch {
  std::optional<SplittingCertificate> certificate;
  std::size_t ell_max = 0;
  /// Per alpha tried (in enumeration order): smallest violation seen. Zero when found.
  std::vector<std::pair<std::vector<int>, double>> gaps;

  bool found() const { return certificate.has_value(); }
};

inline constexpr std::size_t kDefaultEllMax = 64;

/// phi_lo(T) <=_alpha x0 <=_alpha phi_hi(T), checked at the alpha-extreme corners.
/// box[k] is the extent in family dimension first_dim + k.
inline bool verify_certificate(const MapFamily& fam, std::span<const Interval> box, const SplittingCertificate& c,
                               std::size_t first_dim = 0, double tol = 1e-12) {
  if (c.path_lo.length() != c.ell || c.path_hi.length() != c.ell || c.path_lo == c.path_hi) return false;
  if (c.alpha.size() != box.size() || c.x0.size() != box.size()) return false;
  for (std::size_t k = 0; k < box.size(); ++k) {
    const std::size_t j = first_dim + k;
    const bool up = c.alpha[k] > 0;
    const double lo_corner = apply_path_component(fam, c.path_lo, j, up ? box[k].hi : box[k].lo);
    const double hi_corner = apply_path_component(fam, c.path_hi, j, up ? box[k].lo : box[k].hi);
    if (up) {
      if (lo_corner > c.x0[k] + tol || hi_corner < c.x0[k] - tol) return false;
    } else {
      if (lo_corner < c.x0[k] - tol || hi_corner > c.x0[k] + tol) return false;
    }
  }
  return true;
}

namespace detail {

// Swap the last index of path_hi so the two paths differ; nullopt if no swap verifies.
inline std::optional<Path> distinct_variant(const MapFamily& fam, std::span<const Interval> box,
                                            const SplittingCertificate& c, std::size_t first_dim) {
  if (c.path_hi.indices.empty()) return std::nullopt;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    if (i == c.path_hi.indices.back()) continue;
    auto trial = c;
    trial.path_hi.indices.back() = i;
    if (verify_certificate(fam, box, trial, first_dim)) return trial.path_hi;
  }
  return std::nullopt;
}

// Greedy path from `from` in direction dir until the coordinate passes `target`.
inline std::optional<Path> squeeze_path(const MapFamily& fam, std::size_t j, double from, double target,
                                        Direction dir, std::size_t cap) {
  Path p;
  double s = from;
  while (dir == Direction::min ? s > target : s < target) {
    if (p.length() >= cap) return std::nullopt;
    auto [v, i] = extremal_step(fam, j, s, dir);
    if (v == s) return std::nullopt;  // stuck at a common fixed point
    p.indices.push_back(i);
    s = v;
  }
  return p;
}

}  // namespace detail

/// One-dimensional splitting: smallest ell with min-envelope(r) <= max-envelope(l).
/// The certificate's x0 and alpha refer to the single coordinate T.dimension.
inline CertificateSearch splitting_length_1d(const MapFamily& fam, const AbsorbingInterval& T,
                                             std::size_t ell_max = kDefaultEllMax) {
  CertificateSearch out;
  out.ell_max = ell_max;
  const std::size_t j = T.dimension;
  double lo = T.r;
  double hi = T.l;
  double gap = lo - hi;
  for (std::size_t ell = 1; ell <= ell_max; ++ell) {
    lo = extremal_step(fam, j, lo, Direction::min).first;
    hi = extremal_step(fam, j, hi, Direction::max).first;
    gap = lo - hi;
    if (gap > 0.0) continue;
    SplittingCertificate c;
    c.path_lo = extremal_path(fam, j, T.r, ell, Direction::min);
    c.path_hi = extremal_path(fam, j, T.l, ell, Direction::max);
    c.ell = ell;
    c.alpha = {1};
    c.x0 = {0.5 * (lo + hi)};
    const Interval box[] = {T.interval()};
    if (c.path_lo == c.path_hi) {
      auto alt = detail::distinct_variant(fam, box, c, j);
      if (!alt) continue;
      c.path_hi = *alt;
    }
    if (!verify_certificate(fam, box, c, j)) throw InternalError("1-d splitting certificate failed verification");
    out.certificate = std::move(c);
    out.gaps.push_back({{1}, 0.0});
    return out;
  }
  out.gaps.push_back({{1}, gap});
  return out;
}

/// Certificate search for one orthant sign vector, following the dimension-by-dimension
/// construction: split the first coordinate with greedy envelope paths, then for each
/// further coordinate either keep the paths or pre-compose squeezing paths whose length
/// is governed by the path Lipschitz constant (1 + eta K)^ell.
inline CertificateSearch certificate_for_alpha(const MapFamily& fam, std::span<const Interval> box,
                                               const std::vector<int>& alpha,
                                               std::size_t ell_max = kDefaultEllMax) {
  CertificateSearch out;
  out.ell_max = ell_max;
  const std::size_t d = box.size();
  double best_gap = kInf;
  for (std::size_t base = 1; base <= ell_max; ++base) {
    Path p1 = extremal_path(fam, 0, box[0].hi, base, Direction::min);
    Path p2 = extremal_path(fam, 0, box[0].lo, base, Direction::max);
    Point x0(d, 0.0);
    const double r0 = apply_path_component(fam, p1, 0, box[0].hi);
    const double l0 = apply_path_component(fam, p2, 0, box[0].lo);
    if (r0 > l0) {
      best_gap = std::min(best_gap, r0 - l0);
      continue;
    }
    x0[0] = 0.5 * (r0 + l0);
    bool ok = true;
    for (std::size_t j = 1; j < d && ok; ++j) {
      // For alpha_j = +1 the lower path in coordinate j is p1, otherwise p2.
      Path& below = alpha[j] > 0 ? p1 : p2;
      Path& above = alpha[j] > 0 ? p2 : p1;
      const Interval& T = box[j];
      const double bR = apply_path_component(fam, below, j, T.hi);
      const double aL = apply_path_component(fam, above, j, T.lo);
      if (bR <= aL) {
        x0[j] = 0.5 * (bR + aL);
        continue;
      }
      const double bL = apply_path_component(fam, below, j, T.lo);
      const double aR = apply_path_component(fam, above, j, T.hi);
      if (!(bL < aR)) {
        best_gap = std::min(best_gap, bL - aR);
        ok = false;
        break;
      }
      const double K0 = std::pow(1.0 + fam.eta() * fam.lipschitz_K(), static_cast<double>(below.length()));
      const double eps = (aR - bL) / (2.0 * K0);
      const std::size_t room = ell_max - below.length();
      auto qb = detail::squeeze_path(fam, j, T.hi, T.lo + eps, Direction::min, room);
      auto qa = detail::squeeze_path(fam, j, T.lo, T.hi - eps, Direction::max, room);
      if (!qb || !qa) {
        best_gap = std::min(best_gap, aR - bL);
        ok = false;
        break;
      }
      // Equalize lengths; greedy continuation stays inside the squeezed range.
      while (qb->length() < qa->length()) {
        const double s = apply_path_component(fam, *qb, j, T.hi);
        qb->indices.push_back(extremal_step(fam, j, s, Direction::min).second);
      }
      while (qa->length() < qb->length()) {
        const double s = apply_path_component(fam, *qa, j, T.lo);
        qa->indices.push_back(extremal_step(fam, j, s, Direction::max).second);
      }
      below = concat(below, *qb);
      above = concat(above, *qa);
      x0[j] = 0.5 * (aR + bL);
    }
    if (!ok) continue;
    SplittingCertificate c{p1, p2, x0, alpha, p1.length()};
    if (c.path_lo == c.path_hi) {
      auto alt = detail::distinct_variant(fam, box, c, 0);
      if (!alt) continue;
      c.path_hi = *alt;
    }
    if (!verify_certificate(fam, box, c)) continue;
    out.certificate = std::move(c);
    out.gaps.push_back({alpha, 0.0});
    return out;
  }
  out.gaps.push_back({alpha, best_gap});
  return out;
}

/// Tries every alpha with alpha_1 = +1 (binary order, +1 before -1) and returns the first success.
inline CertificateSearch splitting_certificate_multi(const MapFamily& fam, std::span<const Interval> box,
                                                     std::size_t ell_max = kDefaultEllMax) {
  const std::size_t d = box.size();
  CertificateSearch out;
  out.ell_max = ell_max;
  const std::size_t count = std::size_t{1} << (d - 1);
  for (std::size_t mask = 0; mask < count; ++mask) {
    std::vector<int> alpha(d, 1);
    for (std::size_t j = 1; j < d; ++j)
      if (mask & (std::size_t{1} << (d - 1 - j))) alpha[j] = -1;
    auto r = certificate_for_alpha(fam, box, alpha, ell_max);
    out.gaps.insert(out.gaps.end(), r.gaps.begin(), r.gaps.end());
    if (r.found()) {
      out.certificate = std::move(r.certificate);
      return out;
    }
  }
  return out;
}

inline constexpr std::size_t kEscapeCap = 1'000'000;

/// Per-dimension left/right sets, computed once and reused across many escape paths.
inline std::vector<std::pair<IntervalUnion, IntervalUnion>> all_left_right_sets(const MapFamily& fam) {
  std::vector<std::pair<IntervalUnion, IntervalUnion>> out;
  for (std::size_t j = 0; j < fam.dimension(); ++j) out.push_back(left_right_sets(fam.objective(), j, fam.report()));
  return out;
}

/// Greedy path from x into the interior of T, coordinates handled from last to first.
inline Path escape_path(const MapFamily& fam, std::span<const double> x, const Decomposition& dec,
                        const std::vector<std::pair<IntervalUnion, IntervalUnion>>& lr) {
  const auto& I = fam.state_space();
  for (std::size_t j = 0; j < x.size(); ++j)
    if (!I[j].contains_closed(x[j], kStateTol * std::max(1.0, std::abs(x[j]))))
      throw OutOfStateSpace("escape_path start lies outside the state space");
  Point y(x.begin(), x.end());
  Path path;
  for (std::size_t j = dec.dimension(); j-- > 0;) {
    auto inside = [&](double s) {
      return std::any_of(dec.intervals[j].begin(), dec.intervals[j].end(),
                         [&](const AbsorbingInterval& t) { return t.interval().contains_open(s); });
    };
    if (inside(y[j])) continue;
    const auto& [L, R] = lr[j];
    const double s = y[j];
    // Move right if [s, r_m) lies in R, left if (l_m, s] lies in L.
    std::optional<double> right_dist;
    std::optional<double> left_dist;
    if (auto c = R.component_containing(s))
      for (const auto& t : dec.intervals[j])
        if (std::abs(c->hi - t.r) <= kEndpointTol && s < t.r) right_dist = std::max(0.0, t.l - s);
    if (auto c = L.component_containing(s))
      for (const auto& t : dec.intervals[j])
        if (std::abs(c->lo - t.l) <= kEndpointTol && s > t.l) left_dist = std::max(0.0, s - t.r);
    if (!right_dist && !left_dist) throw InternalError("no absorbing interval is reachable from a transient point");
    const bool go_right = right_dist && (!left_dist || *right_dist <= *left_dist);
    const Direction dir = go_right ? Direction::max : Direction::min;
    while (!inside(y[j])) {
      if (path.length() >= kEscapeCap) throw NonTermination("escape path exceeded the length cap");
      const std::size_t i = extremal_step(fam, j, y[j], dir).second;
      y = apply_map(fam, i, y);
      path.indices.push_back(i);
    }
  }
  return path;
}

inline Path escape_path(const MapFamily& fam, std::span<const double> x, const Decomposition& dec) {
  return escape_path(fam, x, dec, all_left_right_sets(fam));
}

struct EscapeReport {
  std::vector<Point> starts;
  std::vector<std::size_t> lengths;
  std::size_t ell_zero = 0;
  Path longest;
};

/// Cell centers of a uniform grid_n^d lattice on I, last coordinate fastest.
inline std::vector<Point> center_lattice(std::span<const Interval> I, std::size_t grid_n) {
  std::vector<Point> pts{Point{}};
  for (const Interval& iv : I) {
    std::vector<Point> next;
    next.reserve(pts.size() * grid_n);
    for (const Point& p : pts)
      for (std::size_t k = 0; k < grid_n; ++k) {
        Point q = p;
        q.push_back(iv.lo + (static_cast<double>(k) + 0.5) * iv.length() / static_cast<double>(grid_n));
        next.push_back(std::move(q));
      }
    pts = std::move(next);
  }
  return pts;
}

/// Max greedy escape length over a lattice of cell centers: an upper estimate of ell_0
/// for the greedy policy.
inline EscapeReport uniform_escape_length(const MapFamily& fam, const Decomposition& dec, std::size_t grid_n) {
  EscapeReport rep;
  const auto lr = all_left_right_sets(fam);
  rep.starts = center_lattice(fam.state_space(), grid_n);
  for (const Point& x : rep.starts) {
    Path p = escape_path(fam, x, dec, lr);
    rep.lengths.push_back(p.length());
    if (p.length() > rep.ell_zero) {
      rep.ell_zero = p.length();
      rep.longest = std::move(p);
    }
  }
  return rep;
}

/// Uniform index in [0, n) from a 64-bit draw by multiply-shift.
inline std::size_t draw_index(std::uint64_t bits, std::size_t n) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(bits) * n) >> 64);
}

inline double draw_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

struct TrajectorySummary {
  std::vector<Interval> I;
  std::size_t bins = 0;               // per dimension
  std::vector<std::uint64_t> counts;  // row-major, last dimension fastest
  std::vector<std::uint64_t> in_rectangle;  // steps spent in each T_m
  std::uint64_t in_transient = 0;
  std::size_t steps = 0;
  Point final_point;
  std::optional<std::size_t> first_entry;  // step at which the walk first entered T

  double bin_center(std::size_t j, std::size_t k) const {
    return I[j].lo + (static_cast<double>(k) + 0.5) * I[j].length() / static_cast<double>(bins);
  }
};

inline std::size_t bin_of(const Interval& iv, std::size_t bins, double s) {
  const double u = (s - iv.lo) / iv.length();
  const auto k = static_cast<std::ptrdiff_t>(std::floor(u * static_cast<double>(bins)));
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(bins) - 1));
}

/// Runs X_{k+1} = phi_{i_k}(X_k) with i_k uniform, recording X_1..X_steps.
/// Throws InternalError if the walk ever leaves a rectangle it has entered.
inline TrajectorySummary sgd_sample(const MapFamily& fam, const Decomposition& dec, std::span<const double> x0,
                                    std::size_t steps, std::uint64_t seed, std::size_t bins = 200) {
  TrajectorySummary out;
  out.I = fam.state_space();
  out.bins = bins;
  out.steps = steps;
  std::size_t cells = 1;
  for (std::size_t j = 0; j < out.I.size(); ++j) cells *= bins;
  out.counts.assign(cells, 0);
  out.in_rectangle.assign(dec.rectangles.size(), 0);
  std::mt19937_64 rng(seed);
  Point x(x0.begin(), x0.end());
  apply_map(fam, 0, x);  // validates x0 against the state space
  constexpr double kAbsorbTol = 1e-9;
  std::optional<std::size_t> home = dec.rectangle_containing(x);
  for (std::size_t k = 0; k < steps; ++k) {
    x = apply_map(fam, draw_index(rng(), fam.size()), x);
    std::size_t flat = 0;
    for (std::size_t j = 0; j < x.size(); ++j) flat = flat * bins + bin_of(out.I[j], bins, x[j]);
    ++out.counts[flat];
    if (home) {
      if (!dec.rectangles[*home].contains(x, kAbsorbTol))
        throw InternalError("trajectory left an absorbing rectangle");
      ++out.in_rectangle[*home];
      continue;
    }
    home = dec.rectangle_containing(x);
    if (home) {
      out.first_entry = k + 1;
      ++out.in_rectangle[*home];
    } else {
      ++out.in_transient;
    }
  }
  if (dec.rectangle_containing(x0) && !out.first_entry) out.first_entry = 0;
  out.final_point = x;
  return out;
}

}  // namespace sgdmc

#endif  // SGDMC_DYNAMICS_HPP
