#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sgdmc/sgdmc.hpp"

namespace fs = std::filesystem;
using namespace sgdmc;

namespace {

enum ExitCode : int { ok = 0, parse = 1, assumption = 2, convergence = 3, singular = 4, internal = 5 };

struct Options {
  std::string command;
  std::string config;
  std::string out;
  std::optional<std::size_t> grid;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
  std::size_t jobs = 1;
  std::optional<std::string> range;
};

// Settings after merging the config file with command-line overrides.
struct Run {
  RunConfig cfg;
  fs::path out;
  std::size_t grid = 0;
  double tol = 0.0;
  std::uint64_t seed = 1;
  std::size_t steps = 0;
  std::size_t jobs = 1;

  const SeparableObjective& obj() const { return *cfg.objective; }
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

Range parse_range(const std::string& text) {
  const auto a = text.find(':');
  const auto b = text.find(':', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos) throw InvalidInput("range must look like lo:hi:count");
  Range r;
  try {
    std::size_t used = 0;
    const std::string lo = text.substr(0, a), hi = text.substr(a + 1, b - a - 1), cnt = text.substr(b + 1);
    r.lo = std::stod(lo, &used);
    if (used != lo.size()) throw std::invalid_argument(lo);
    r.hi = std::stod(hi, &used);
    if (used != hi.size()) throw std::invalid_argument(hi);
    const long long c = std::stoll(cnt, &used);
    if (used != cnt.size() || c <= 0) throw std::invalid_argument(cnt);
    r.count = static_cast<std::size_t>(c);
  } catch (const std::logic_error&) {
    throw InvalidInput("range must look like lo:hi:count with count > 0, got '" + text + "'");
  }
  if (!(r.hi >= r.lo)) throw InvalidInput("range needs hi >= lo");
  if (r.count > 1 && !(r.hi > r.lo)) throw InvalidInput("range with several points needs hi > lo");
  return r;
}

std::size_t default_grid(std::size_t d) { return d == 1 ? 1000 : (d == 2 ? 100 : 16); }
std::size_t default_bins(std::size_t d) { return d == 1 ? 200 : (d == 2 ? 50 : 10); }

Run prepare(const Options& o) {
  Run r;
  r.cfg = load_config(o.config);
  const std::size_t d = r.obj().dimension();
  r.grid = o.grid ? *o.grid : r.cfg.grid.value_or(default_grid(d));
  r.tol = o.tol ? *o.tol : r.cfg.tol.value_or(d == 1 ? kDefaultTol1d : kDefaultTolNd);
  r.seed = o.seed ? *o.seed : r.cfg.seed.value_or(1);
  r.steps = o.steps ? *o.steps : r.cfg.steps.value_or(1'000'000);
  r.jobs = std::max<std::size_t>(1, o.jobs);
  if (r.grid == 0) throw InvalidInput("grid size must be positive");
  if (!(r.tol > 0.0)) throw InvalidInput("tolerance must be positive");
  r.out = o.out;
  fs::create_directories(r.out);
  return r;
}

std::string path_in(const Run& r, const std::string& name) { return (r.out / name).string(); }

// Orthant used by d_tilde on each rectangle: the certificate's alpha, else all +1.
std::vector<std::vector<int>> metric_alphas(const AnalysisReport& rep, std::size_t d) {
  std::vector<std::vector<int>> out;
  for (const auto& c : rep.certificates) out.push_back(c.certificate ? c.certificate->alpha : std::vector<int>(d, 1));
  return out;
}

std::string cell_header(std::size_t d) {
  if (d == 1) return "x";
  std::string s;
  for (std::size_t j = 0; j < d; ++j) s += (j ? ",x" : "x") + std::to_string(j + 1);
  return s;
}

std::string cell_prefix(const Grid& g, std::size_t c) {
  std::string s;
  for (double x : g.cell_center(c)) s += num(x) + ',';
  return s;
}

struct Exact {
  AnalysisReport report;
  Decomposition dec;
  std::shared_ptr<const Grid> grid;
  UlamOperator op;
  std::vector<InvariantResult> components;
};

Exact exact_invariants(const Run& r) {
  Exact e;
  e.report = run_analysis(r.obj(), r.cfg.eta, {r.cfg.ell_max.value_or(kDefaultEllMax), 0});
  e.dec = decompose(r.obj(), r.cfg.eta);
  const MapFamily fam(r.obj(), r.cfg.eta);
  e.grid = std::make_shared<const Grid>(Grid::aligned(e.dec, r.grid));
  spdlog::debug("Ulam grid with {} cells", e.grid->size());
  e.op = ulam_assemble(fam, e.grid, e.dec);
  for (std::size_t m = 0; m < e.dec.rectangles.size(); ++m)
    e.components.push_back(invariant_measure(e.op, m, r.tol, kDefaultMaxIter));
  return e;
}

int cmd_analyze(const Run& r) {
  const auto rep = run_analysis(r.obj(), r.cfg.eta, {r.cfg.ell_max.value_or(kDefaultEllMax), 0});
  for (const auto& c : rep.certificates)
    if (!c.certificate) spdlog::warn("no splitting certificate found for a rectangle up to ell_max");
  write_json(path_in(r, "report.json"), to_json(rep));
  return ok;
}

int cmd_invariant(const Run& r) {
  const Exact e = exact_invariants(r);
  const Grid& g = *e.grid;
  json j = to_json(e.report);
  j["grid"] = r.grid;
  j["max_row_defect"] = e.op.max_row_defect;
  j["leakage"] = e.op.leakage;
  j["invariant"] = json::array();
  for (std::size_t m = 0; m < e.components.size(); ++m) {
    const auto& res = e.components[m];
    const std::string name = "invariant_T" + std::to_string(m + 1) + ".csv";
    std::string text = cell_header(g.dimension()) + ",mass,density\n";
    for (std::size_t c = 0; c < g.size(); ++c)
      text += cell_prefix(g, c) + num(res.measure[c]) + ',' + num(res.measure[c] / g.volume(c)) + '\n';
    write_text(path_in(r, name), text);
    j["invariant"].push_back({{"rectangle", indices_to_json(e.dec.rectangles[m].index)},
                              {"file", name},
                              {"iterations", res.iterations},
                              {"residual", res.residual}});
  }
  write_json(path_in(r, "report.json"), j);
  return ok;
}

int cmd_basins(const Run& r) {
  const Exact e = exact_invariants(r);
  const Grid& g = *e.grid;
  const MapFamily fam(r.obj(), r.cfg.eta);
  const auto b = basin_functions(fam, e.grid, e.dec, std::min(r.tol, 1e-12), kDefaultMaxIter);
  const std::size_t M = b.g.size();
  std::string text = cell_header(g.dimension());
  for (std::size_t m = 0; m < M; ++m) text += ",g" + std::to_string(m + 1);
  text += '\n';
  for (std::size_t c = 0; c < g.size(); ++c) {
    text += cell_prefix(g, c);
    for (std::size_t m = 0; m < M; ++m) text += num(b.g[m][c]) + (m + 1 < M ? "," : "\n");
  }
  write_text(path_in(r, "basins.csv"), text);

  const auto mu0 = DiscreteMeasure::uniform(e.grid);
  const MetricConfig mc{e.op.partition, metric_alphas(e.report, g.dimension())};
  const std::size_t k_max = r.cfg.steps.value_or(10'000);
  // Stop above the floor set by the accuracy of the invariant measures themselves.
  const auto mix = limit_mixture(e.op, mu0, mc, k_max, 10.0 * r.tol, r.tol, kDefaultMaxIter);
  std::string conv = "k,d_tilde,transient_mass\n";
  for (std::size_t k = 0; k < mix.distance.size(); ++k)
    conv += std::to_string(k) + ',' + num(mix.distance[k]) + ',' + num(mix.transient_mass[k]) + '\n';
  write_text(path_in(r, "convergence.csv"), conv);

  json j = to_json(e.report);
  j["grid"] = r.grid;
  j["basins"] = {{"file", "basins.csv"},
                 {"iterations", b.iterations},
                 {"residual", b.residual},
                 {"partition_defect", b.partition_defect},
                 {"coefficients_uniform_basins", mixture_coefficients(b, mu0)}};
  j["mixture"] = {{"file", "convergence.csv"},
                  {"coefficients_uniform", mix.coefficients},
                  {"final_distance", mix.distance.back()},
                  {"iterations", mix.distance.size() - 1},
                  {"envelope_constant", mix.envelope.constant},
                  {"envelope_ratio", mix.envelope.ratio}};
  write_json(path_in(r, "report.json"), j);
  return ok;
}

std::string intervals_text(const std::vector<Interval>& ivs) {
  std::string s;
  for (std::size_t k = 0; k < ivs.size(); ++k) s += (k ? ";" : "") + num(ivs[k].lo) + ':' + num(ivs[k].hi);
  return s;
}

int cmd_sweep(const Run& r, const Options& o) {
  if (!r.cfg.base_polynomial) throw InvalidInput("sweep needs a config with the 'objective'/'lambda' shortcut");
  const std::string range_text = o.range ? *o.range : r.cfg.range.value_or("");
  if (range_text.empty()) throw InvalidInput("sweep needs --range lo:hi:count");
  const Range range = parse_range(range_text);
  std::vector<double> lambdas = range.count == 1 ? std::vector<double>{range.lo} : linspace(range.lo, range.hi, range.count);

  // Workers pull lambda indices; results land in their slots so output order is fixed.
  std::vector<std::optional<SweepPoint>> points(lambdas.size());
  std::vector<std::exception_ptr> errors(lambdas.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < lambdas.size();) {
      try {
        points[k] = sweep_point(*r.cfg.base_polynomial, lambdas[k]);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(r.jobs, lambdas.size()); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);

  std::string text = "kind,lambda,count,eta0,intervals\n";
  auto row = [&](const char* kind, const SweepPoint& p) {
    text += std::string(kind) + ',' + num(p.lambda) + ',' + std::to_string(p.count) + ',' + num(p.eta0) + ',' +
            intervals_text(p.intervals) + '\n';
  };
  for (const auto& p : points) row("grid", *p);
  for (std::size_t k = 1; k < points.size(); ++k) {
    if (points[k]->count == points[k - 1]->count) continue;
    const Transition t = bisect_transition(*r.cfg.base_polynomial, *points[k - 1], *points[k]);
    spdlog::info("count {} -> {} near lambda {}", t.below.count, t.above.count, num(t.lambda()));
    row("below", t.below);
    row("above", t.above);
  }
  write_text(path_in(r, "sweep.csv"), text);
  return ok;
}

int cmd_sample(const Run& r) {
  const MapFamily fam(r.obj(), r.cfg.eta);
  const Decomposition dec = decompose(r.obj(), r.cfg.eta);
  const std::size_t d = r.obj().dimension();
  Point x0;
  if (r.cfg.x0) {
    x0 = *r.cfg.x0;
    if (x0.size() != d) throw InvalidInput("x0 has the wrong dimension");
  } else {
    for (const auto& iv : dec.I) x0.push_back(0.5 * (iv.lo + iv.hi));
  }
  const std::size_t bins = r.cfg.bins.value_or(default_bins(d));
  if (bins == 0) throw InvalidInput("bins must be positive");
  const auto s = sgd_sample(fam, dec, x0, r.steps, r.seed, bins);

  std::string text = (d == 1 ? std::string("bin_center") : cell_header(d)) + ",count\n";
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t c = 0; c < s.counts.size(); ++c) {
    std::size_t rest = c;
    for (std::size_t j = d; j-- > 0;) {
      idx[j] = rest % bins;
      rest /= bins;
    }
    for (std::size_t j = 0; j < d; ++j) text += num(s.bin_center(j, idx[j])) + ',';
    text += std::to_string(s.counts[c]) + '\n';
  }
  write_text(path_in(r, "histogram.csv"), text);

  json j{{"steps", s.steps},
         {"seed", r.seed},
         {"x0", x0},
         {"bins", bins},
         {"in_rectangle", s.in_rectangle},
         {"in_transient", s.in_transient},
         {"final_point", s.final_point},
         {"first_entry", s.first_entry ? json(*s.first_entry) : json(nullptr)},
         {"histogram", "histogram.csv"}};

  if (d == 1 && s.steps > 0) {
    // d_F between the time histogram and the Ulam limit for a start at x0.
    const auto grid = std::make_shared<const Grid>(Grid::aligned(dec, r.grid));
    const auto op = ulam_assemble(fam, grid, dec);
    const auto mu0 = DiscreteMeasure::point_mass(grid, grid->locate(0, x0[0]));
    const MetricConfig mc{op.partition, std::vector<std::vector<int>>(dec.rectangles.size(), {1})};
    const auto mix = limit_mixture(op, mu0, mc, 0, 0.0, r.tol, kDefaultMaxIter);
    const auto cdf = mix.mu_star.cdf();
    const auto& edges = grid->edges(0);
    auto star_cdf = [&](double x) {
      const std::size_t k = grid->locate(0, x);
      const double below = k ? cdf[k - 1] : 0.0;
      const double frac = std::clamp((x - edges[k]) / (edges[k + 1] - edges[k]), 0.0, 1.0);
      return below + frac * mix.mu_star[k];
    };
    double acc = 0.0, best = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      acc += static_cast<double>(s.counts[k]) / static_cast<double>(s.steps);
      const double edge = k + 1 == bins ? s.I[0].hi : s.I[0].lo + s.I[0].length() * static_cast<double>(k + 1) / bins;
      best = std::max(best, std::abs(acc - star_cdf(edge)));
    }
    j["d_F_vs_ulam"] = best;
    j["ulam_grid"] = r.grid;
    j["ulam_coefficients"] = mix.coefficients;
  }
  write_json(path_in(r, "sample.json"), j);
  return ok;
}

int cmd_diffusion(const Run& r) {
  if (r.obj().dimension() != 1) throw InvalidInput("diffusion needs a one-dimensional objective");
  // The singularity check runs before decompose, which rejects objectives with one summand.
  const auto I = state_space(r.obj(), critical_point_report(r.obj()));
  const auto xs = linspace(I[0].lo, I[0].hi, r.grid + 1);
  const auto prof = stationary_density(r.obj(), r.cfg.eta, xs);
  std::string text = "x,Phi,u,D,V,rho_star\n";
  for (std::size_t k = 0; k < xs.size(); ++k)
    text += csv_row({prof.x[k], prof.Phi[k], prof.u[k], prof.D[k], prof.V[k], prof.rho[k]});
  write_text(path_in(r, "diffusion.csv"), text);

  const Exact e = exact_invariants(r);
  const auto rho = diffusion_measure(r.obj(), r.cfg.eta, e.grid);
  const std::size_t M = e.components.size();
  std::string cmp = "kind,index,value\n";
  cmp += "count_exact,0," + std::to_string(M) + '\n';
  cmp += "count_diffusion,0,1\n";
  cmp += std::string("counts_agree,0,") + (M == 1 ? "1" : "0") + '\n';
  for (std::size_t m = 0; m < M; ++m) {
    const auto mask = e.op.partition.mask(static_cast<int>(m));
    const double mass = rho.mass_on(mask);
    cmp += "rho_mass_T,"+ std::to_string(m + 1) + ',' + num(mass) + '\n';
    double dist = 1.0;
    if (mass > 0.0) {
      auto cond = rho.restricted(mask);
      cond.normalize();
      dist = d_F(cond, e.components[m].measure);
    }
    cmp += "d_F_T," + std::to_string(m + 1) + ',' + num(dist) + '\n';
  }
  const auto mix = limit_mixture(e.op, DiscreteMeasure::uniform(e.grid), {e.op.partition, std::vector<std::vector<int>>(M, {1})}, 0,
                                 0.0, r.tol, kDefaultMaxIter);
  cmp += "d_F_mixture,0," + num(d_F(rho, mix.mu_star)) + '\n';
  cmp += "truncation_estimate,0," + num(prof.truncation_estimate) + '\n';
  write_text(path_in(r, "comparison.csv"), cmp);
  if (M != 1) spdlog::info("diffusion approximation predicts 1 stationary density, exact analysis finds {}", M);
  return ok;
}

int exit_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_input: return parse;
    case ErrorKind::assumption: return assumption;
    case ErrorKind::convergence: return convergence;
    case ErrorKind::singular_diffusion: return singular;
    case ErrorKind::internal: return internal;
  }
  return internal;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_st("sgdmc");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("SGDMC_LOG")) {
    const auto parsed = spdlog::level::from_str(lvl);
    // from_str maps unknown names to off; only accept "off" when asked for explicitly.
    if (parsed != spdlog::level::off || std::string(lvl) == "off")
      spdlog::set_level(parsed);
    else
      spdlog::warn("ignoring unknown SGDMC_LOG level '{}'", lvl);
  }
}

int dispatch(const Options& o) {
  const Run r = prepare(o);
  if (o.command == "analyze") return cmd_analyze(r);
  if (o.command == "invariant") return cmd_invariant(r);
  if (o.command == "basins") return cmd_basins(r);
  if (o.command == "sweep") return cmd_sweep(r, o);
  if (o.command == "sample") return cmd_sample(r);
  return cmd_diffusion(r);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Invariant measures of constant-step SGD on separable polynomial objectives"};
  app.require_subcommand(1);
  Options o;
  const std::pair<const char*, const char*> commands[] = {
      {"analyze", "decomposition, step-size bound and splitting certificates"},
      {"invariant", "Ulam invariant measure on each absorbing rectangle"},
      {"basins", "basin functions and convergence of the limit mixture"},
      {"sweep", "rectangle count over a lambda range with bisected transitions"},
      {"sample", "time histogram of one SGD trajectory"},
      {"diffusion", "stationary density of the diffusion approximation"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "objective config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory")->required();
    sub->add_option("--grid", o.grid, "grid cells per dimension");
    sub->add_option("--tol", o.tol, "iteration tolerance");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--steps", o.steps, "trajectory length");
    sub->add_option("--jobs", o.jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
    sub->add_option("--range", o.range, "lambda range lo:hi:count");
    sub->callback([&o, n = std::string(name)] { o.command = n; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : parse;
  }

  const auto start = std::chrono::steady_clock::now();
  int code = ok;
  try {
    code = dispatch(o);
  } catch (const StepSizeTooLarge& e) {
    std::cerr << "error: step size eta=" << num(e.eta()) << " is not below eta0=" << num(e.eta_max()) << '\n';
    code = assumption;
  } catch (const SingularDiffusion& e) {
    std::cerr << "error: " << e.what();
    for (std::size_t k = 0; k < std::min<std::size_t>(e.points.size(), 5); ++k) std::cerr << (k ? ", " : " at x = ") << num(e.points[k]);
    std::cerr << '\n';
    code = singular;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = exit_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = parse;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    code = internal;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  spdlog::info("{} finished in {:.3f} s with exit code {}", o.command, secs, code);
  return code;
}
