#ifndef SGDMC_ANALYSIS_HPP
#define SGDMC_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sgdmc/absorbing.hpp"
#include "sgdmc/dynamics.hpp"
#include "sgdmc/objective.hpp"

namespace sgdmc {

struct CertificateEntry {
  std::vector<std::size_t> rectangle;  // 0-based interval index per dimension
  std::optional<SplittingCertificate> certificate;
  std::vector<std::pair<std::vector<int>, double>> gaps;

  bool operator==(const CertificateEntry& o) const {
    auto same_cert = [](const std::optional<SplittingCertificate>& a, const std::optional<SplittingCertificate>& b) {
      if (a.has_value() != b.has_value()) return false;
      if (!a) return true;
      return a->path_lo == b->path_lo && a->path_hi == b->path_hi && a->x0 == b->x0 && a->alpha == b->alpha &&
             a->ell == b->ell;
    };
    return rectangle == o.rectangle && same_cert(certificate, o.certificate) && gaps == o.gaps;
  }
};

/// Structural results for one objective and step size.
struct AnalysisReport {
  std::vector<Interval> I;
  std::vector<std::vector<Interval>> intervals;  // absorbing intervals per dimension
  std::vector<Rectangle> rectangles;
  std::vector<std::size_t> counts;
  bool unique = false;
  double eta = 0.0;
  double lipschitz_K = 0.0;
  double eta0 = 0.0;
  std::vector<CertificateEntry> certificates;
  std::size_t ell0 = 0;
  std::size_t ell_combined = 0;  // 2 * max(ell0, max_m ell_m)
  bool ell_at_least_d = true;

  bool operator==(const AnalysisReport& o) const {
    auto same_rects = [](const std::vector<Rectangle>& a, const std::vector<Rectangle>& b) {
      if (a.size() != b.size()) return false;
      for (std::size_t k = 0; k < a.size(); ++k)
        if (a[k].index != b[k].index || a[k].box != b[k].box) return false;
      return true;
    };
    return I == o.I && intervals == o.intervals && same_rects(rectangles, o.rectangles) && counts == o.counts &&
           unique == o.unique && eta == o.eta && lipschitz_K == o.lipschitz_K && eta0 == o.eta0 &&
           certificates == o.certificates && ell0 == o.ell0 && ell_combined == o.ell_combined &&
           ell_at_least_d == o.ell_at_least_d;
  }
};

struct AnalysisOptions {
  std::size_t ell_max = kDefaultEllMax;
  std::size_t escape_grid = 0;  // 0: choose by dimension
};

inline std::size_t default_escape_grid(std::size_t d) { return d == 1 ? 1000 : (d == 2 ? 64 : 12); }

/// Certificate for rectangle m: the 1-d envelope search in one dimension, the orthant search otherwise.
inline CertificateSearch certificate_for_rectangle(const MapFamily& fam, const Decomposition& dec, std::size_t m,
                                                   std::size_t ell_max) {
  if (dec.dimension() == 1) return splitting_length_1d(fam, dec.intervals[0][dec.rectangles[m].index[0]], ell_max);
  return splitting_certificate_multi(fam, dec.rectangles[m].box, ell_max);
}

inline AnalysisReport run_analysis(const SeparableObjective& obj, double eta, const AnalysisOptions& opt = {}) {
  MapFamily fam(obj, eta);
  const Decomposition dec = decompose(obj, eta);
  AnalysisReport rep;
  rep.I = dec.I;
  for (const auto& dim : dec.intervals) {
    rep.intervals.emplace_back();
    for (const auto& t : dim) rep.intervals.back().push_back(t.interval());
  }
  rep.rectangles = dec.rectangles;
  rep.counts = dec.counts;
  rep.unique = dec.unique;
  rep.eta = eta;
  rep.lipschitz_K = fam.lipschitz_K();
  rep.eta0 = fam.eta_max();
  std::size_t ell_max_found = 0;
  for (std::size_t m = 0; m < dec.rectangles.size(); ++m) {
    auto search = certificate_for_rectangle(fam, dec, m, opt.ell_max);
    if (search.certificate) ell_max_found = std::max(ell_max_found, search.certificate->ell);
    rep.certificates.push_back({dec.rectangles[m].index, std::move(search.certificate), std::move(search.gaps)});
  }
  const std::size_t grid_n = opt.escape_grid ? opt.escape_grid : default_escape_grid(obj.dimension());
  rep.ell0 = uniform_escape_length(fam, dec, grid_n).ell_zero;
  rep.ell_combined = 2 * std::max(rep.ell0, ell_max_found);
  rep.ell_at_least_d = rep.ell_combined >= obj.dimension();
  return rep;
}

/// Rectangle count and eta0 for the lambda-splitting of F (no step-size check).
struct SweepPoint {
  double lambda = 0.0;
  std::size_t count = 0;
  double eta0 = 0.0;
  std::vector<Interval> intervals;
};

inline SweepPoint sweep_point(const Polynomial& F, double lambda) {
  const auto obj = lambda_split(F, lambda);
  const auto report = critical_point_report(obj);
  const auto dec = decompose(obj, report);
  SweepPoint p;
  p.lambda = lambda;
  p.count = dec.rectangles.size();
  p.eta0 = 1.0 / lipschitz_constant(obj, dec.I);
  for (const auto& t : dec.intervals[0]) p.intervals.push_back(t.interval());
  return p;
}

struct Transition {
  SweepPoint below;  // last point with the count of the lower end
  SweepPoint above;  // first point with a different count

  double lambda() const { return 0.5 * (below.lambda + above.lambda); }
};

/// Bisects a count change between lo and hi (count(lo) != count(hi)) down to width tol.
inline Transition bisect_transition(const Polynomial& F, SweepPoint lo, SweepPoint hi, double tol = 1e-6) {
  while (hi.lambda - lo.lambda > tol) {
    const double mid = 0.5 * (lo.lambda + hi.lambda);
    auto p = sweep_point(F, mid);
    if (p.count == lo.count)
      lo = std::move(p);
    else
      hi = std::move(p);
  }
  return {std::move(lo), std::move(hi)};
}

}  // namespace sgdmc

#endif  // SGDMC_ANALYSIS_HPP
