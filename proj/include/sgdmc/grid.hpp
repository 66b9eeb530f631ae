#ifndef SGDMC_GRID_HPP
#define SGDMC_GRID_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sgdmc/absorbing.hpp"
#include "sgdmc/error.hpp"
#include "sgdmc/interval.hpp"

namespace sgdmc {

/// Tensor grid of cells on a box; flat cell index is row-major with the last dimension fastest.
class Grid {
 public:
  explicit Grid(std::vector<std::vector<double>> edges) : edges_(std::move(edges)) {
    if (edges_.empty()) throw InvalidInput("grid needs at least one dimension");
    for (const auto& e : edges_) {
      if (e.size() < 2) throw InvalidInput("grid needs at least one cell per dimension");
      for (std::size_t k = 1; k < e.size(); ++k)
        if (!(e[k] > e[k - 1])) throw InvalidInput("grid edges must be strictly increasing");
    }
  }

  /// N equal cells per dimension.
  static Grid uniform(std::span<const Interval> box, std::size_t N) {
    std::vector<std::vector<double>> edges;
    for (const Interval& iv : box) edges.push_back(uniform_edges(iv, N));
    return Grid(std::move(edges));
  }

  /// About N cells per dimension, with every absorbing-interval endpoint on a cell edge.
  /// Each segment between consecutive breakpoints gets round(N * share) cells (at least one).
  static Grid aligned(const Decomposition& dec, std::size_t N) {
    std::vector<std::vector<double>> edges;
    for (std::size_t j = 0; j < dec.dimension(); ++j) {
      const Interval& I = dec.I[j];
      std::vector<double> breaks{I.lo};
      for (const auto& t : dec.intervals[j])
        for (double b : {t.l, t.r})
          if (b > breaks.back() && b < I.hi) breaks.push_back(b);
      breaks.push_back(I.hi);
      std::vector<double> e{I.lo};
      for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
        const Interval seg{breaks[s], breaks[s + 1]};
        const auto cells = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(static_cast<double>(N) * seg.length() / I.length())));
        auto part = uniform_edges(seg, cells);
        e.insert(e.end(), part.begin() + 1, part.end());
      }
      edges.push_back(std::move(e));
    }
    return Grid(std::move(edges));
  }

  std::size_t dimension() const { return edges_.size(); }
  std::size_t cells(std::size_t j) const { return edges_[j].size() - 1; }
  std::size_t size() const {
    std::size_t s = 1;
    for (std::size_t j = 0; j < dimension(); ++j) s *= cells(j);
    return s;
  }
  const std::vector<double>& edges(std::size_t j) const { return edges_[j]; }
  Interval cell_extent(std::size_t j, std::size_t k) const { return {edges_[j][k], edges_[j][k + 1]}; }
  double center(std::size_t j, std::size_t k) const { return 0.5 * (edges_[j][k] + edges_[j][k + 1]); }
  Interval extent(std::size_t j) const { return {edges_[j].front(), edges_[j].back()}; }

  std::vector<std::size_t> unflatten(std::size_t flat) const {
    std::vector<std::size_t> idx(dimension());
    for (std::size_t j = dimension(); j-- > 0;) {
      idx[j] = flat % cells(j);
      flat /= cells(j);
    }
    return idx;
  }
  std::size_t flatten(std::span<const std::size_t> idx) const {
    std::size_t flat = 0;
    for (std::size_t j = 0; j < dimension(); ++j) flat = flat * cells(j) + idx[j];
    return flat;
  }

  Point cell_center(std::size_t flat) const {
    const auto idx = unflatten(flat);
    Point c(dimension());
    for (std::size_t j = 0; j < dimension(); ++j) c[j] = center(j, idx[j]);
    return c;
  }
  double volume(std::size_t flat) const {
    const auto idx = unflatten(flat);
    double v = 1.0;
    for (std::size_t j = 0; j < dimension(); ++j) v *= cell_extent(j, idx[j]).length();
    return v;
  }

  /// Cell index along dimension j containing s; points on an edge go right, clamped to the grid.
  std::size_t locate(std::size_t j, double s) const {
    const auto& e = edges_[j];
    auto it = std::upper_bound(e.begin(), e.end(), s);
    const auto k = static_cast<std::ptrdiff_t>(it - e.begin()) - 1;
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(cells(j)) - 1));
  }

  bool operator==(const Grid&) const = default;

 private:
  static std::vector<double> uniform_edges(const Interval& iv, std::size_t N) {
    if (N == 0) throw InvalidInput("grid size must be positive");
    std::vector<double> e(N + 1);
    for (std::size_t k = 0; k <= N; ++k) e[k] = iv.lo + iv.length() * static_cast<double>(k) / static_cast<double>(N);
    e.back() = iv.hi;
    return e;
  }

  std::vector<std::vector<double>> edges_;
};

/// Nonnegative weights per grid cell.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::shared_ptr<const Grid> grid, std::vector<double> weights)
      : grid_(std::move(grid)), w_(std::move(weights)) {
    if (w_.size() != grid_->size()) throw GridMismatch("weight count does not match the grid");
    for (double v : w_)
      if (!(v >= 0.0)) throw InvalidInput("measure weights must be nonnegative");
  }

  static DiscreteMeasure zero(std::shared_ptr<const Grid> grid) {
    const std::size_t n = grid->size();
    return {std::move(grid), std::vector<double>(n, 0.0)};
  }
  /// Normalized Lebesgue measure on the cells selected by mask (all cells if empty).
  static DiscreteMeasure uniform(std::shared_ptr<const Grid> grid, const std::vector<bool>& mask = {}) {
    std::vector<double> w(grid->size(), 0.0);
    for (std::size_t c = 0; c < w.size(); ++c)
      if (mask.empty() || mask[c]) w[c] = grid->volume(c);
    DiscreteMeasure m(std::move(grid), std::move(w));
    m.normalize();
    return m;
  }
  static DiscreteMeasure point_mass(std::shared_ptr<const Grid> grid, std::size_t cell) {
    auto m = zero(std::move(grid));
    m.w_.at(cell) = 1.0;
    return m;
  }

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  const std::vector<double>& weights() const { return w_; }
  double operator[](std::size_t c) const { return w_[c]; }
  std::size_t size() const { return w_.size(); }
  double mass() const { return std::accumulate(w_.begin(), w_.end(), 0.0); }

  void normalize() {
    const double m = mass();
    if (!(m > 0.0)) throw InvalidInput("cannot normalize a zero measure");
    for (double& v : w_) v /= m;
  }

  /// Mass of the cells selected by mask.
  double mass_on(const std::vector<bool>& mask) const {
    double s = 0.0;
    for (std::size_t c = 0; c < w_.size(); ++c)
      if (mask[c]) s += w_[c];
    return s;
  }
  DiscreteMeasure restricted(const std::vector<bool>& mask) const {
    std::vector<double> w(w_.size(), 0.0);
    for (std::size_t c = 0; c < w.size(); ++c)
      if (mask[c]) w[c] = w_[c];
    return {grid_, std::move(w)};
  }
  DiscreteMeasure scaled(double s) const {
    std::vector<double> w(w_);
    for (double& v : w) v *= s;
    return {grid_, std::move(w)};
  }

  /// Cumulative mass up to each right cell edge (1-d).
  std::vector<double> cdf() const {
    std::vector<double> F(w_.size());
    std::partial_sum(w_.begin(), w_.end(), F.begin());
    return F;
  }

 private:
  std::shared_ptr<const Grid> grid_;
  std::vector<double> w_;
};

inline void require_same_grid(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.grid_ptr() != b.grid_ptr() && !(a.grid() == b.grid()))
    throw GridMismatch("measures live on different grids");
}

inline DiscreteMeasure operator+(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  require_same_grid(a, b);
  std::vector<double> w(a.weights());
  for (std::size_t c = 0; c < w.size(); ++c) w[c] += b[c];
  return {a.grid_ptr(), std::move(w)};
}

/// Assignment of grid cells to the absorbing rectangles; label -1 marks the transient set.
/// A cell belongs to T_m only if it lies entirely inside T_m; straddling cells count as transient.
struct CellPartition {
  std::vector<int> label;
  std::size_t rectangles = 0;

  std::vector<bool> mask(int m) const {
    std::vector<bool> out(label.size());
    for (std::size_t c = 0; c < label.size(); ++c) out[c] = label[c] == m;
    return out;
  }
  std::vector<bool> transient_mask() const { return mask(-1); }
  std::size_t count(int m) const { return static_cast<std::size_t>(std::count(label.begin(), label.end(), m)); }
};

inline CellPartition partition_cells(const Grid& grid, const Decomposition& dec, double tol = 1e-12) {
  CellPartition p;
  p.rectangles = dec.rectangles.size();
  p.label.assign(grid.size(), -1);
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const auto idx = grid.unflatten(c);
    for (std::size_t m = 0; m < dec.rectangles.size(); ++m) {
      bool inside = true;
      for (std::size_t j = 0; j < grid.dimension() && inside; ++j) {
        const Interval cell = grid.cell_extent(j, idx[j]);
        const Interval& box = dec.rectangles[m].box[j];
        inside = cell.lo >= box.lo - tol && cell.hi <= box.hi + tol;
      }
      if (inside) {
        p.label[c] = static_cast<int>(m);
        break;
      }
    }
  }
  return p;
}

}  // namespace sgdmc

#endif  // SGDMC_GRID_HPP
