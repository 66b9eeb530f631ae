#ifndef SGDMC_METRICS_HPP
#define SGDMC_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "sgdmc/grid.hpp"

namespace sgdmc {

/// Kolmogorov distance: max over cell edges of |F_mu - F_nu| (1-d grids).
inline double d_F(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_grid(mu, nu);
  if (mu.grid().dimension() != 1) throw GridMismatch("d_F needs a one-dimensional grid");
  double acc = 0.0;
  double best = 0.0;
  for (std::size_t c = 0; c < mu.size(); ++c) {
    acc += mu[c] - nu[c];
    best = std::max(best, std::abs(acc));
  }
  return best;
}

/// Sup of |mu(A) - nu(A)| over anchored orthant rectangles A = {y : alpha o y <= alpha o c},
/// c ranging over the cell-corner lattice. Equals d_F in one dimension.
inline double d_alpha_rect(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const std::vector<int>& alpha) {
  require_same_grid(mu, nu);
  const Grid& g = mu.grid();
  const std::size_t d = g.dimension();
  if (alpha.size() != d) throw GridMismatch("alpha has the wrong dimension");
  std::vector<double> acc(mu.size());
  for (std::size_t c = 0; c < acc.size(); ++c) acc[c] = mu[c] - nu[c];
  // Prefix sums along each axis; for alpha_j = -1 accumulate from the right instead.
  std::size_t stride = 1;
  for (std::size_t j = d; j-- > 0;) {
    const std::size_t n = g.cells(j);
    const std::size_t block = stride * n;
    for (std::size_t base = 0; base < acc.size(); base += block)
      for (std::size_t off = 0; off < stride; ++off) {
        if (alpha[j] > 0) {
          for (std::size_t k = 1; k < n; ++k) acc[base + off + k * stride] += acc[base + off + (k - 1) * stride];
        } else {
          for (std::size_t k = n - 1; k-- > 0;) acc[base + off + k * stride] += acc[base + off + (k + 1) * stride];
        }
      }
    stride = block;
  }
  double best = 0.0;
  for (double v : acc) best = std::max(best, std::abs(v));
  return best;
}

/// Total variation: half the l1 distance of the cell weights.
inline double total_variation(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_grid(mu, nu);
  double s = 0.0;
  for (std::size_t c = 0; c < mu.size(); ++c) s += std::abs(mu[c] - nu[c]);
  return 0.5 * s;
}

/// One alpha per rectangle plus the cell partition of the decomposition.
struct MetricConfig {
  CellPartition partition;
  std::vector<std::vector<int>> alphas;
};

/// TV on the transient cells plus the sum over rectangles of d_alpha on each restriction.
inline double d_tilde(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const MetricConfig& cfg) {
  require_same_grid(mu, nu);
  if (cfg.partition.label.size() != mu.size()) throw GridMismatch("cell partition does not match the grid");
  if (cfg.alphas.size() != cfg.partition.rectangles) throw InvalidInput("need one alpha per rectangle");
  const auto B = cfg.partition.transient_mask();
  double out = total_variation(mu.restricted(B), nu.restricted(B));
  for (std::size_t m = 0; m < cfg.alphas.size(); ++m) {
    const auto mask = cfg.partition.mask(static_cast<int>(m));
    out += d_alpha_rect(mu.restricted(mask), nu.restricted(mask), cfg.alphas[m]);
  }
  return out;
}

}  // namespace sgdmc

#endif  // SGDMC_METRICS_HPP
