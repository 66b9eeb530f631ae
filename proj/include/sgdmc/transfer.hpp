#ifndef SGDMC_TRANSFER_HPP
#define SGDMC_TRANSFER_HPP

#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "sgdmc/absorbing.hpp"
#include "sgdmc/dynamics.hpp"
#include "sgdmc/error.hpp"
#include "sgdmc/grid.hpp"
#include "sgdmc/metrics.hpp"

namespace sgdmc {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Row-stochastic discretization of the Markov operator; rows are source cells.
struct UlamOperator {
  SparseMatrix P;
  std::shared_ptr<const Grid> grid;
  CellPartition partition;
  double max_row_defect = 0.0;
  /// Largest mass fraction a cell of T_m sends outside T_m, per rectangle.
  std::vector<double> leakage;
};

namespace detail {

// Overlap fractions of the image interval [a, b] with the cells of one grid axis.
// Cells outside [first, last] are never targeted.
inline void spread_axis(const Grid& g, std::size_t j, double a, double b, std::size_t first, std::size_t last,
                        std::vector<std::pair<std::size_t, double>>& out) {
  out.clear();
  const auto& e = g.edges(j);
  if (!(b > a)) {
    out.emplace_back(std::clamp(g.locate(j, a), first, last), 1.0);
    return;
  }
  const std::size_t k0 = std::clamp(g.locate(j, a), first, last);
  const double len = b - a;
  double total = 0.0;
  for (std::size_t k = k0; k <= last; ++k) {
    if (e[k] >= b) break;
    const double ov = std::min(b, e[k + 1]) - std::max(a, e[k]);
    if (ov > 0.0) {
      out.emplace_back(k, ov / len);
      total += ov / len;
    }
  }
  if (out.empty()) {
    out.emplace_back(k0, 1.0);
    return;
  }
  for (auto& [k, w] : out) w /= total;  // exact unit sum despite rounding
}

// Range of cell indices along axis j lying inside [lo, hi].
inline std::pair<std::size_t, std::size_t> cell_range(const Grid& g, std::size_t j, const Interval& iv,
                                                      double tol = 1e-12) {
  const auto& e = g.edges(j);
  std::size_t first = 0;
  while (first + 1 < g.cells(j) && e[first] < iv.lo - tol) ++first;
  std::size_t last = g.cells(j) - 1;
  while (last > first && e[last + 1] > iv.hi + tol) --last;
  return {first, last};
}

}  // namespace detail

/// Ulam matrix: each map sends a cell to its image box, spread over target cells in proportion
/// to overlap volume. Images of cells inside a rectangle are clipped to that rectangle, so the
/// rectangle blocks are exactly invariant; everything else is clipped to the state space.
inline UlamOperator ulam_assemble(const MapFamily& fam, std::shared_ptr<const Grid> grid, const Decomposition& dec) {
  const Grid& g = *grid;
  const std::size_t d = g.dimension();
  if (d != fam.dimension()) throw GridMismatch("grid dimension differs from the objective");
  UlamOperator op;
  op.grid = grid;
  op.partition = partition_cells(g, dec);
  op.leakage.assign(dec.rectangles.size(), 0.0);

  // Allowed target ranges per dimension: the whole grid, or the cells of one absorbing interval.
  std::vector<std::pair<std::size_t, std::size_t>> full(d);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> per_interval(d);
  for (std::size_t j = 0; j < d; ++j) {
    full[j] = {0, g.cells(j) - 1};
    for (const auto& t : dec.intervals[j]) per_interval[j].push_back(detail::cell_range(g, j, t.interval()));
  }

  const double inv_n = 1.0 / static_cast<double>(fam.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(g.size() * fam.size() * 4);
  std::vector<std::vector<std::pair<std::size_t, double>>> axes(d);
  std::vector<std::pair<std::size_t, double>> row;
  for (std::size_t c = 0; c < g.size(); ++c) {
    const auto idx = g.unflatten(c);
    const int lab = op.partition.label[c];
    row.clear();
    for (std::size_t i = 0; i < fam.size(); ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        const Interval cell = g.cell_extent(j, idx[j]);
        Interval clip = g.extent(j);
        auto range = full[j];
        if (lab >= 0) {
          const std::size_t t = dec.rectangles[static_cast<std::size_t>(lab)].index[j];
          clip = dec.intervals[j][t].interval();
          range = per_interval[j][t];
        }
        const double a = std::clamp(fam.component(i, j, cell.lo), clip.lo, clip.hi);
        const double b = std::clamp(fam.component(i, j, cell.hi), clip.lo, clip.hi);
        detail::spread_axis(g, j, a, b, range.first, range.second, axes[j]);
      }
      // Tensor product of the per-axis overlaps.
      std::vector<std::size_t> pos(d, 0);
      while (true) {
        std::size_t flat = 0;
        double w = inv_n;
        for (std::size_t j = 0; j < d; ++j) {
          flat = flat * g.cells(j) + axes[j][pos[j]].first;
          w *= axes[j][pos[j]].second;
        }
        row.emplace_back(flat, w);
        std::size_t j = d;
        while (j-- > 0) {
          if (++pos[j] < axes[j].size()) break;
          pos[j] = 0;
        }
        if (j == static_cast<std::size_t>(-1)) break;
      }
    }
    double sum = 0.0;
    double leak = 0.0;
    for (const auto& [t, w] : row) {
      trip.emplace_back(static_cast<int>(c), static_cast<int>(t), w);
      sum += w;
      if (lab >= 0 && op.partition.label[t] != lab) leak += w;
    }
    op.max_row_defect = std::max(op.max_row_defect, std::abs(sum - 1.0));
    if (lab >= 0) op.leakage[static_cast<std::size_t>(lab)] = std::max(op.leakage[static_cast<std::size_t>(lab)], leak);
  }
  const auto n = static_cast<Eigen::Index>(g.size());
  op.P.resize(n, n);
  op.P.setFromTriplets(trip.begin(), trip.end());
  op.P.makeCompressed();
  return op;
}

/// mu -> P mu, i.e. the transpose action on cell weights.
inline DiscreteMeasure push_forward(const UlamOperator& op, const DiscreteMeasure& mu) {
  if (mu.size() != static_cast<std::size_t>(op.P.rows())) throw GridMismatch("measure does not match the operator");
  Eigen::Map<const Eigen::VectorXd> w(mu.weights().data(), static_cast<Eigen::Index>(mu.size()));
  Eigen::VectorXd out = op.P.transpose() * w;
  std::vector<double> v(out.data(), out.data() + out.size());
  for (double& x : v) x = std::max(0.0, x);
  return {mu.grid_ptr(), std::move(v)};
}

inline constexpr double kDefaultTol1d = 1e-10;
inline constexpr double kDefaultTolNd = 1e-8;
inline constexpr std::size_t kDefaultMaxIter = 1'000'000;

struct InvariantResult {
  DiscreteMeasure measure;
  std::size_t iterations = 0;
  /// d_F (1-d) or TV (d >= 2) between P mu* and mu*.
  double residual = 0.0;
};

/// Change between successive iterates: d_F in one dimension, TV otherwise.
inline double iterate_change(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  return a.grid().dimension() == 1 ? d_F(a, b) : total_variation(a, b);
}

/// Power iteration of the block restricted to the cells of rectangle m, from the uniform start.
inline InvariantResult invariant_measure(const UlamOperator& op, std::size_t m, double tol, std::size_t max_iter) {
  const auto mask = op.partition.mask(static_cast<int>(m));
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; }))
    throw InvalidInput("rectangle " + std::to_string(m + 1) + " contains no whole grid cell; refine the grid");
  DiscreteMeasure mu = DiscreteMeasure::uniform(op.grid, mask);
  double change = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    DiscreteMeasure next = push_forward(op, mu).restricted(mask);
    next.normalize();
    change = iterate_change(next, mu);
    mu = std::move(next);
    if (change < tol) {
      DiscreteMeasure again = push_forward(op, mu);
      const double residual = iterate_change(again, mu);
      return {std::move(mu), it, residual};
    }
  }
  throw NoConvergence("invariant measure of T" + std::to_string(m + 1), change);
}

struct BasinFunctions {
  std::shared_ptr<const Grid> grid;
  std::vector<std::vector<double>> g;  // g[m][cell], values at cell centers
  std::size_t iterations = 0;
  double residual = 0.0;               // max_m sup |P* g_m - g_m|
  double partition_defect = 0.0;       // sup |sum_m g_m - 1|
};

namespace detail {

// Dual operator on cell-center nodes: (P* psi)(x) = (1/n) sum_i psi(phi_i(x)), where psi
// equals a constant on each rectangle and is multilinearly interpolated elsewhere.
// Stored as psi_new = A psi + sum_m hits[m] * seed[m] on the transient nodes.
struct DualOperator {
  SparseMatrix A;
  std::vector<std::vector<double>> hits;  // hits[m][node]: probability of landing in T_m
  std::vector<std::size_t> transient;
};

inline DualOperator build_dual(const MapFamily& fam, const Grid& g, const Decomposition& dec,
                               const CellPartition& part) {
  const std::size_t d = g.dimension();
  const std::size_t M = dec.rectangles.size();
  DualOperator op;
  op.hits.assign(M, std::vector<double>(g.size(), 0.0));
  std::vector<Eigen::Triplet<double>> trip;
  const double inv_n = 1.0 / static_cast<double>(fam.size());
  std::vector<std::vector<double>> centers(d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = 0; k < g.cells(j); ++k) centers[j].push_back(g.center(j, k));

  for (std::size_t c = 0; c < g.size(); ++c) {
    if (part.label[c] >= 0) continue;
    op.transient.push_back(c);
    const Point x = g.cell_center(c);
    for (std::size_t i = 0; i < fam.size(); ++i) {
      Point y(d);
      for (std::size_t j = 0; j < d; ++j) y[j] = fam.component(i, j, x[j]);
      if (auto m = dec.rectangle_containing(y)) {
        op.hits[*m][c] += inv_n;
        continue;
      }
      // Multilinear weights on the surrounding centers, clamped at the outer half cells.
      std::vector<std::pair<std::size_t, double>> lo_hi(d);
      std::vector<std::size_t> base(d);
      std::vector<double> frac(d);
      for (std::size_t j = 0; j < d; ++j) {
        const auto& cj = centers[j];
        if (cj.size() == 1 || y[j] <= cj.front()) {
          base[j] = 0;
          frac[j] = 0.0;
        } else if (y[j] >= cj.back()) {
          base[j] = cj.size() - 2;
          frac[j] = 1.0;
        } else {
          const auto k = static_cast<std::size_t>(std::upper_bound(cj.begin(), cj.end(), y[j]) - cj.begin()) - 1;
          base[j] = k;
          frac[j] = (y[j] - cj[k]) / (cj[k + 1] - cj[k]);
        }
      }
      for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
        double w = inv_n;
        std::vector<std::size_t> idx(d);
        for (std::size_t j = 0; j < d; ++j) {
          const bool up = (corner >> (d - 1 - j)) & 1U;
          if (centers[j].size() == 1) {
            if (up) w = 0.0;
            idx[j] = 0;
            continue;
          }
          idx[j] = base[j] + (up ? 1 : 0);
          w *= up ? frac[j] : 1.0 - frac[j];
        }
        if (w == 0.0) continue;
        const std::size_t node = g.flatten(idx);
        const int lab = part.label[node];
        if (lab >= 0)
          op.hits[static_cast<std::size_t>(lab)][c] += w;
        else
          trip.emplace_back(static_cast<int>(c), static_cast<int>(node), w);
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(g.size());
  op.A.resize(n, n);
  op.A.setFromTriplets(trip.begin(), trip.end());
  op.A.makeCompressed();
  return op;
}

}  // namespace detail

/// Basin functions g_m by iterating the dual operator from the seed 1 on T_m, 0 on the
/// other rectangles and 1/M on the transient cells, until the sup change is below tol.
inline BasinFunctions basin_functions(const MapFamily& fam, std::shared_ptr<const Grid> grid,
                                      const Decomposition& dec, double tol, std::size_t max_iter) {
  const Grid& g = *grid;
  const auto part = partition_cells(g, dec);
  const std::size_t M = dec.rectangles.size();
  BasinFunctions out;
  out.grid = grid;
  out.g.assign(M, std::vector<double>(g.size(), 0.0));
  if (M == 1) {
    std::fill(out.g[0].begin(), out.g[0].end(), 1.0);
    return out;
  }
  const auto dual = detail::build_dual(fam, g, dec, part);
  const auto n = static_cast<Eigen::Index>(g.size());
  for (std::size_t m = 0; m < M; ++m) {
    Eigen::VectorXd psi(n);
    Eigen::VectorXd hit = Eigen::Map<const Eigen::VectorXd>(dual.hits[m].data(), n);
    for (Eigen::Index c = 0; c < n; ++c) {
      const int lab = part.label[static_cast<std::size_t>(c)];
      psi[c] = lab < 0 ? 1.0 / static_cast<double>(M) : (lab == static_cast<int>(m) ? 1.0 : 0.0);
    }
    Eigen::VectorXd fixed = psi;
    for (std::size_t c : dual.transient) fixed[static_cast<Eigen::Index>(c)] = 0.0;
    double change = kInf;
    std::size_t it = 0;
    while (change >= tol) {
      if (++it > max_iter) throw NoConvergence("basin function g" + std::to_string(m + 1), change);
      Eigen::VectorXd next = dual.A * psi + hit + fixed;
      change = (next - psi).cwiseAbs().maxCoeff();
      psi = std::move(next);
    }
    const Eigen::VectorXd again = dual.A * psi + hit + fixed;
    out.residual = std::max(out.residual, (again - psi).cwiseAbs().maxCoeff());
    out.iterations = std::max(out.iterations, it);
    out.g[m].assign(psi.data(), psi.data() + n);
  }
  for (std::size_t c = 0; c < g.size(); ++c) {
    double s = 0.0;
    for (std::size_t m = 0; m < M; ++m) s += out.g[m][c];
    out.partition_defect = std::max(out.partition_defect, std::abs(s - 1.0));
  }
  return out;
}

/// c_m = sum over cells of g_m * mu0.
inline std::vector<double> mixture_coefficients(const BasinFunctions& g, const DiscreteMeasure& mu0) {
  if (mu0.size() != g.grid->size()) throw GridMismatch("initial measure does not match the basin grid");
  std::vector<double> c;
  for (const auto& gm : g.g) {
    double s = 0.0;
    for (std::size_t k = 0; k < gm.size(); ++k) s += gm[k] * mu0[k];
    c.push_back(s);
  }
  return c;
}

/// Absorption probabilities of the discrete chain: h_m = P h_m off the rectangles,
/// h_m = 1 on T_m and 0 on the other rectangles.
inline std::vector<std::vector<double>> absorption_probabilities(const UlamOperator& op, double tol = 1e-15,
                                                                 std::size_t max_iter = kDefaultMaxIter) {
  const std::size_t M = op.partition.rectangles;
  const auto n = op.P.rows();
  std::vector<std::vector<double>> out;
  for (std::size_t m = 0; m < M; ++m) {
    Eigen::VectorXd h(n);
    for (Eigen::Index c = 0; c < n; ++c) h[c] = op.partition.label[static_cast<std::size_t>(c)] == static_cast<int>(m);
    double change = kInf;
    std::size_t it = 0;
    while (change > tol) {
      if (++it > max_iter) throw NoConvergence("absorption probabilities", change);
      Eigen::VectorXd next = op.P * h;
      for (Eigen::Index c = 0; c < n; ++c)
        if (op.partition.label[static_cast<std::size_t>(c)] >= 0) next[c] = h[c];
      change = (next - h).cwiseAbs().maxCoeff();
      h = std::move(next);
    }
    out.emplace_back(h.data(), h.data() + n);
  }
  return out;
}

struct GeometricEnvelope {
  double constant = 0.0;
  double ratio = 1.0;
};

/// Least-squares fit of log(values) over the tail, then the smallest constant that
/// makes C * ratio^k dominate every tail point. Zero entries are skipped.
inline GeometricEnvelope fit_geometric_envelope(const std::vector<double>& values, std::size_t first) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t cnt = 0;
  for (std::size_t k = first; k < values.size(); ++k) {
    if (!(values[k] > 0.0)) continue;
    const double x = static_cast<double>(k);
    const double y = std::log(values[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  GeometricEnvelope env;
  if (cnt < 2) return env;
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  env.ratio = std::exp(slope);
  double logc = -kInf;
  for (std::size_t k = first; k < values.size(); ++k)
    if (values[k] > 0.0) logc = std::max(logc, std::log(values[k]) - slope * static_cast<double>(k));
  env.constant = std::exp(logc);
  return env;
}

struct MixtureResult {
  DiscreteMeasure mu_star;
  std::vector<double> coefficients;
  std::vector<InvariantResult> components;
  std::vector<double> distance;       // d_tilde(mu_k, mu_star), k = 0, 1, ...
  std::vector<double> transient_mass; // mu_k(B)
  GeometricEnvelope envelope;
};

/// mu* = sum_m c_m mu*_m with c_m from the discrete absorption probabilities, and the
/// log of d_tilde(mu_k, mu*) until it drops below stop_tol or k reaches k_max.
inline MixtureResult limit_mixture(const UlamOperator& op, const DiscreteMeasure& mu0, const MetricConfig& cfg,
                                   std::size_t k_max, double stop_tol = 0.0, double tol = kDefaultTol1d,
                                   std::size_t max_iter = kDefaultMaxIter) {
  const std::size_t M = op.partition.rectangles;
  std::vector<InvariantResult> comps;
  for (std::size_t m = 0; m < M; ++m) comps.push_back(invariant_measure(op, m, tol, max_iter));
  std::vector<double> coeff(M, 1.0);
  if (M > 1) {
    const auto h = absorption_probabilities(op);
    for (std::size_t m = 0; m < M; ++m) {
      coeff[m] = 0.0;
      for (std::size_t c = 0; c < mu0.size(); ++c) coeff[m] += h[m][c] * mu0[c];
    }
  } else {
    coeff[0] = mu0.mass();
  }
  DiscreteMeasure star = DiscreteMeasure::zero(op.grid);
  for (std::size_t m = 0; m < M; ++m) star = star + comps[m].measure.scaled(coeff[m]);

  MixtureResult out{star, coeff, std::move(comps), {}, {}, {}};
  const auto B = op.partition.transient_mask();
  DiscreteMeasure mu = mu0;
  for (std::size_t k = 0;; ++k) {
    out.distance.push_back(d_tilde(mu, star, cfg));
    out.transient_mass.push_back(mu.mass_on(B));
    if (k >= k_max || out.distance.back() < stop_tol) break;
    mu = push_forward(op, mu);
  }
  out.envelope = fit_geometric_envelope(out.distance, out.distance.size() / 2);
  return out;
}

}  // namespace sgdmc

#endif  // SGDMC_TRANSFER_HPP
