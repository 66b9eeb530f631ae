#ifndef SGDMC_IO_HPP
#define SGDMC_IO_HPP

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sgdmc/analysis.hpp"
#include "sgdmc/error.hpp"
#include "sgdmc/objective.hpp"

namespace sgdmc {

using json = nlohmann::json;

/// Objective plus the run parameters a config file may carry. Every field except the
/// objective and eta is optional; command-line flags override file values.
struct RunConfig {
  std::optional<SeparableObjective> objective;
  std::optional<Polynomial> base_polynomial;  // set for the lambda shortcut
  std::optional<double> lambda;
  double eta = 0.0;
  std::optional<std::size_t> grid;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> bins;
  std::optional<std::size_t> ell_max;
  std::optional<Point> x0;
  std::optional<std::string> range;
};

namespace detail {

inline Polynomial poly_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw InvalidInput(where + " must be an array of coefficients");
  std::vector<double> c;
  for (const auto& v : j) {
    if (!v.is_number()) throw InvalidInput(where + " has a non-numeric coefficient");
    c.push_back(v.get<double>());
  }
  return Polynomial(std::move(c));
}

template <class T>
std::optional<T> optional_field(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

/// Accepts {"dimension", "n", "components", "eta"} or {"objective", "lambda", "eta"}.
inline RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("config must be a JSON object");
  RunConfig cfg;
  const auto eta = detail::optional_field<double>(j, "eta");
  if (!eta) throw InvalidInput("config needs a numeric 'eta'");
  cfg.eta = *eta;
  if (j.contains("objective")) {
    const auto lambda = detail::optional_field<double>(j, "lambda");
    if (!lambda) throw InvalidInput("the 'objective' shortcut needs 'lambda'");
    cfg.base_polynomial = detail::poly_from_json(j.at("objective"), "objective");
    cfg.lambda = *lambda;
    cfg.objective = lambda_split(*cfg.base_polynomial, *lambda);
  } else if (j.contains("components")) {
    const auto& comp = j.at("components");
    if (!comp.is_array()) throw InvalidInput("'components' must be an array over dimensions");
    std::vector<std::vector<Polynomial>> table;
    for (std::size_t d = 0; d < comp.size(); ++d) {
      if (!comp[d].is_array()) throw InvalidInput("'components' entries must be arrays over summands");
      table.emplace_back();
      for (std::size_t i = 0; i < comp[d].size(); ++i)
        table.back().push_back(
            detail::poly_from_json(comp[d][i], "components[" + std::to_string(d) + "][" + std::to_string(i) + "]"));
    }
    if (auto dim = detail::optional_field<std::size_t>(j, "dimension"); dim && *dim != table.size())
      throw InvalidInput("'dimension' disagrees with 'components'");
    if (auto n = detail::optional_field<std::size_t>(j, "n"); n && !table.empty() && *n != table.front().size())
      throw InvalidInput("'n' disagrees with 'components'");
    cfg.objective = SeparableObjective(std::move(table));
  } else {
    throw InvalidInput("config needs 'components' or 'objective'");
  }
  cfg.grid = detail::optional_field<std::size_t>(j, "grid");
  cfg.tol = detail::optional_field<double>(j, "tol");
  cfg.seed = detail::optional_field<std::uint64_t>(j, "seed");
  cfg.steps = detail::optional_field<std::size_t>(j, "steps");
  cfg.bins = detail::optional_field<std::size_t>(j, "bins");
  cfg.ell_max = detail::optional_field<std::size_t>(j, "ell_max");
  cfg.x0 = detail::optional_field<std::vector<double>>(j, "x0");
  cfg.range = detail::optional_field<std::string>(j, "range");
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

// ---- JSON for results. Indices are 1-based in files, 0-based in memory. ----

inline json to_json(const Interval& iv) { return json::array({iv.lo, iv.hi}); }

inline Interval interval_from_json(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

inline json indices_to_json(const std::vector<std::size_t>& idx) {
  json a = json::array();
  for (std::size_t k : idx) a.push_back(k + 1);
  return a;
}

inline std::vector<std::size_t> indices_from_json(const json& j) {
  std::vector<std::size_t> idx;
  for (const auto& v : j) {
    const auto k = v.get<std::size_t>();
    if (k == 0) throw InvalidInput("indices in result files are 1-based");
    idx.push_back(k - 1);
  }
  return idx;
}

inline json to_json(const SplittingCertificate& c) {
  return {{"alpha", c.alpha},
          {"ell", c.ell},
          {"path_lo", indices_to_json(c.path_lo.indices)},
          {"path_hi", indices_to_json(c.path_hi.indices)},
          {"x0", c.x0}};
}

inline SplittingCertificate certificate_from_json(const json& j) {
  SplittingCertificate c;
  c.alpha = j.at("alpha").get<std::vector<int>>();
  c.ell = j.at("ell").get<std::size_t>();
  c.path_lo.indices = indices_from_json(j.at("path_lo"));
  c.path_hi.indices = indices_from_json(j.at("path_hi"));
  c.x0 = j.at("x0").get<std::vector<double>>();
  return c;
}

inline json decomposition_json(const std::vector<Interval>& I, const std::vector<Rectangle>& rects,
                               const std::vector<std::size_t>& counts, bool unique) {
  json out;
  out["I"] = json::array();
  for (const auto& iv : I) out["I"].push_back(to_json(iv));
  out["T"] = json::array();
  for (const auto& r : rects) {
    json box = json::array();
    for (const auto& iv : r.box) box.push_back(to_json(iv));
    out["T"].push_back({{"index", indices_to_json(r.index)}, {"box", box}});
  }
  out["counts"] = counts;
  out["unique"] = unique;
  return out;
}

inline json decomposition_json(const Decomposition& dec) {
  return decomposition_json(dec.I, dec.rectangles, dec.counts, dec.unique);
}

inline json to_json(const AnalysisReport& r) {
  json out = decomposition_json(r.I, r.rectangles, r.counts, r.unique);
  out["intervals"] = json::array();
  for (const auto& dim : r.intervals) {
    json a = json::array();
    for (const auto& iv : dim) a.push_back(to_json(iv));
    out["intervals"].push_back(a);
  }
  out["eta"] = r.eta;
  out["K"] = r.lipschitz_K;
  out["eta0"] = r.eta0;
  out["certificates"] = json::array();
  for (const auto& c : r.certificates) {
    json e{{"rectangle", indices_to_json(c.rectangle)}, {"found", c.certificate.has_value()}};
    if (c.certificate) e["certificate"] = to_json(*c.certificate);
    json gaps = json::array();
    for (const auto& [alpha, gap] : c.gaps) gaps.push_back({{"alpha", alpha}, {"gap", std::isfinite(gap) ? json(gap) : json(nullptr)}});
    e["gaps"] = gaps;
    out["certificates"].push_back(e);
  }
  out["ell0"] = r.ell0;
  out["ell_combined"] = r.ell_combined;
  out["ell_at_least_d"] = r.ell_at_least_d;
  return out;
}

inline AnalysisReport report_from_json(const json& j) {
  AnalysisReport r;
  for (const auto& iv : j.at("I")) r.I.push_back(interval_from_json(iv));
  for (const auto& t : j.at("T")) {
    Rectangle rect;
    rect.index = indices_from_json(t.at("index"));
    for (const auto& iv : t.at("box")) rect.box.push_back(interval_from_json(iv));
    r.rectangles.push_back(std::move(rect));
  }
  r.counts = j.at("counts").get<std::vector<std::size_t>>();
  r.unique = j.at("unique").get<bool>();
  for (const auto& dim : j.at("intervals")) {
    r.intervals.emplace_back();
    for (const auto& iv : dim) r.intervals.back().push_back(interval_from_json(iv));
  }
  r.eta = j.at("eta").get<double>();
  r.lipschitz_K = j.at("K").get<double>();
  r.eta0 = j.at("eta0").get<double>();
  for (const auto& e : j.at("certificates")) {
    CertificateEntry c;
    c.rectangle = indices_from_json(e.at("rectangle"));
    if (e.at("found").get<bool>()) c.certificate = certificate_from_json(e.at("certificate"));
    for (const auto& g : e.at("gaps")) c.gaps.emplace_back(g.at("alpha").get<std::vector<int>>(),
                          g.at("gap").is_null() ? kInf : g.at("gap").get<double>());
    r.certificates.push_back(std::move(c));
  }
  r.ell0 = j.at("ell0").get<std::size_t>();
  r.ell_combined = j.at("ell_combined").get<std::size_t>();
  r.ell_at_least_d = j.at("ell_at_least_d").get<bool>();
  return r;
}

// ---- CSV ----

/// Full-precision decimal text of a double, locale independent.
inline std::string num(double v) { return fmt::format("{:.17g}", v); }

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path);
  out << text;
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

/// Comma-joined row of full-precision numbers.
inline std::string csv_row(const std::vector<double>& values) {
  std::string s;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) s += ',';
    s += num(values[k]);
  }
  s += '\n';
  return s;
}

}  // namespace sgdmc

#endif  // SGDMC_IO_HPP
