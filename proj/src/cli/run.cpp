#include "nillab/cli/run.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "nillab/errors.hpp"
#include "nillab/joinings.hpp"
#include "nillab/params.hpp"
#include "nillab/random.hpp"
#include "nillab/rigidity.hpp"
#include "nillab/seminorms.hpp"
#include "nillab/summation.hpp"

namespace nillab::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream ids for derive_seed; fixed so that reruns reproduce payloads.
constexpr std::uint64_t kJoiningStream = 0;
constexpr std::uint64_t kHaarStream = 1;
constexpr std::uint64_t kRecursiveSeedStream = 10;
constexpr std::uint64_t kCubeSeedStream = 20;
constexpr std::uint64_t kSubnilStream = 100;
constexpr std::uint64_t kDiagonalStream = 1000;
constexpr std::uint64_t kReferenceStream = 1002;

Value i64(std::size_t v) { return static_cast<std::int64_t>(v); }

std::vector<std::string> coordinate_names(const Space& space, std::string_view suffix = "") {
  static constexpr const char* names[] = {"x", "y", "z"};
  std::vector<std::string> out;
  for (int i = 0; i < space.dim; ++i) out.push_back(std::string(names[i]) + std::string(suffix));
  return out;
}

void push_coords(std::vector<Value>& row, const NilPoint& p) {
  for (int i = 0; i < p.space.dim; ++i) row.push_back(p.c[i]);
}

ReportOptions report_options(const RunConfig& cfg, const NilSystem& sys) {
  ReportOptions opts;
  opts.family.max_freq = cfg.max_freq;
  opts.thresholds = default_thresholds(sys);
  opts.thresholds.bin_size = cfg.bin_size;
  opts.thresholds.min_count = cfg.min_count;
  opts.thresholds.graph_like_factor = cfg.graph_like_factor;
  opts.thresholds.non_graph_fraction = cfg.non_graph_fraction;
  opts.metric = sys.metric;
  opts.n_ref = cfg.n_ref;
  opts.ref_seed = derive_seed(cfg.seed, kReferenceStream);
  return opts;
}

std::vector<Table> run_orbit(const RunConfig& cfg, const NilSystem& sys) {
  const Observable f = observables::parse(cfg.f);
  Table t{"orbit", {"k"}, {}};
  for (auto& c : coordinate_names(sys.space)) t.columns.push_back(c);
  t.columns.push_back("f_re");
  t.columns.push_back("f_im");
  const auto pts = orbit(sys, base_point(sys.space), cfg.orbit_length);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    std::vector<Value> row{i64(k)};
    push_coords(row, pts[k]);
    const Complex v = f(pts[k]);
    row.push_back(v.real());
    row.push_back(v.imag());
    t.add(std::move(row));
  }
  return {t};
}

std::vector<Table> run_integrate(const RunConfig& cfg, const NilSystem& sys) {
  const Observable f = observables::parse(cfg.f);
  const Complex birkhoff = birkhoff_avg(sys, f, base_point(sys.space), cfg.n);

  const auto pts = haar_sample(sys.space, cfg.n_mc, derive_seed(cfg.seed, kHaarStream));
  CompensatedSum<Complex> sum;
  CompensatedSum<double> sq;
  for (const auto& p : pts) {
    const Complex v = f(p);
    sum.add(v);
    sq.add(std::norm(v));
  }
  const double m = static_cast<double>(pts.size());
  const Complex haar = sum.value() / m;
  const double var = std::max(0.0, sq.value() / m - std::norm(haar));
  const double stderr_mc = std::sqrt(var / m);

  Table t{"integrate",
          {"observable", "n", "birkhoff_re", "birkhoff_im", "birkhoff_abs", "n_mc", "haar_re", "haar_im",
           "haar_stderr", "abs_difference"},
          {}};
  t.add({f.id, i64(cfg.n), birkhoff.real(), birkhoff.imag(), std::abs(birkhoff), i64(cfg.n_mc), haar.real(),
         haar.imag(), stderr_mc, std::abs(birkhoff - haar)});
  return {t};
}

std::vector<Table> run_seminorm(const RunConfig& cfg, const NilSystem& sys) {
  const Observable f = observables::parse(cfg.f);
  const SeminormBudget budget{cfg.max_products};
  Table est{"estimates",
            {"estimator", "k", "value", "stability", "raw", "imag_diagnostic", "n_side", "n_base", "seed"},
            {}};
  auto add = [&](const SeminormEstimate& e, std::string_view name) {
    est.add({std::string(name), static_cast<std::int64_t>(e.k), e.value, e.stability, e.raw, e.imag_diagnostic,
             i64(e.n_side), i64(e.n_base), std::to_string(e.seed)});
  };

  if (cfg.k == 1) {
    add(u1(sys, f, cfg.n_base), "birkhoff");
    return {est};
  }

  const auto seeds = [&](std::uint64_t stream) {
    std::vector<std::uint64_t> s;
    for (int i = 0; i < cfg.stability_seeds; ++i) s.push_back(derive_seed(cfg.seed, stream + i));
    return s;
  };
  std::vector<SeminormEstimate> results;
  if (cfg.estimator != "cube") {
    const auto s = seeds(kRecursiveSeedStream);
    results.push_back(recursive_with_stability(sys, f, cfg.k, cfg.n_outer, cfg.n_base, s, budget));
    add(results.back(), "recursive");
  }
  if (cfg.estimator != "recursive") {
    const auto s = seeds(kCubeSeedStream);
    results.push_back(cube_with_stability(sys, f, cfg.k, cfg.n_side, cfg.n_cube_mc, s, budget));
    add(results.back(), "cube");
  }
  std::vector<Table> out{est};
  if (results.size() == 2) {
    const double diff = std::abs(results[0].value - results[1].value);
    const double tol = agreement_tolerance(results[0], results[1]);
    Table agree{"agreement", {"difference", "tolerance", "agree"}, {}};
    agree.add({diff, tol, diff <= tol});
    out.push_back(agree);
  }
  return out;
}

std::vector<Table> run_joining(const RunConfig& cfg, const NilSystem& sys) {
  const Provenance scheme = parse_provenance(cfg.scheme);
  const std::uint64_t seed = derive_seed(cfg.seed, kJoiningStream);
  double parameter = kNaN;
  std::optional<EmpiricalMeasure> m;
  if (cfg.kind == "diagonal") {
    m.emplace(diagonal_joining(sys, cfg.n, scheme, seed));
  } else if (cfg.kind == "vertical") {
    parameter = eval_expression(cfg.u);
    m.emplace(vertical_graph_joining(sys, parameter, cfg.n, scheme, seed));
  } else if (cfg.kind == "counterexample") {
    parameter = eval_expression(cfg.s);
    m.emplace(counterexample_joining(sys, parameter, cfg.n, scheme, seed));
  } else if (cfg.kind == "translation") {
    const auto v = parse_expression_list(cfg.v);
    parameter = v.front();
    m.emplace(translation_graph_joining(sys, v, cfg.n, scheme, seed));
  } else {
    throw std::invalid_argument("unknown joining kind '" + cfg.kind + "'");
  }

  const ReportOptions opts = report_options(cfg, sys);
  const auto diag = diagonal_joining(sys, cfg.n, Provenance::direct_haar, derive_seed(cfg.seed, kDiagonalStream));
  const JoiningReport r = analyze_joining(*m, integrate_family(diag, opts.family), opts);
  const double drift = invariance_drift(*m, sys, opts.family);

  Table t{"report",
          {"kind", "parameter", "scheme", "n", "dist_to_diagonal", "graphness", "marginal_error_1",
           "marginal_error_2", "invariance_drift", "classification", "populated_bins", "bin_size",
           "graph_like_threshold", "non_graph_threshold", "fiber_diameter"},
          {}};
  const auto& th = r.thresholds;
  t.add({cfg.kind, parameter, std::string(to_string(scheme)), i64(cfg.n), r.dist_to_diagonal, r.graphness,
         r.marginal_error_1, r.marginal_error_2, drift, std::string(to_string(r.classification)),
         i64(r.populated_bins), th.bin_size, th.graph_like_factor * th.bin_size,
         th.non_graph_fraction * th.fiber_diameter, th.fiber_diameter});
  std::vector<Table> out{t};

  if (cfg.emit_points) {
    Table pts{"points", {}, {}};
    for (auto& c : coordinate_names(sys.space, "1")) pts.columns.push_back(c);
    for (auto& c : coordinate_names(sys.space, "2")) pts.columns.push_back(c);
    for (std::size_t i = 0; i < m->size(); ++i) {
      std::vector<Value> row;
      push_coords(row, m->first()[i]);
      push_coords(row, m->second()[i]);
      pts.add(std::move(row));
    }
    out.push_back(std::move(pts));
  }
  return out;
}

std::vector<Table> run_sweep(const RunConfig& cfg, const NilSystem& sys) {
  const auto u_grid = parse_expression_list(cfg.u_grid);
  const auto s_grid = parse_expression_list(cfg.s_grid);
  SweepConfig sc;
  sc.n = cfg.n;
  sc.seed = cfg.seed;
  sc.report = report_options(cfg, sys);
  sc.u_star = eval_expression(cfg.u_star);
  const RigidityReport r = rigidity_sweep(sys, u_grid, s_grid, sc);

  Table sweep{"sweep",
              {"family", "parameter", "dist_to_diagonal", "graphness", "marginal_error_1", "marginal_error_2",
               "classification", "populated_bins"},
              {}};
  for (const auto& p : r.points) {
    sweep.add({p.family, p.parameter, p.report.dist_to_diagonal, p.report.graphness, p.report.marginal_error_1,
               p.report.marginal_error_2, std::string(to_string(p.report.classification)),
               i64(p.report.populated_bins)});
  }
  Table summary{"summary",
                {"n", "delta_hat", "neighborhood_u", "u_star", "max_graph_dist_near_diagonal", "margin", "noise",
                 "margin_over_noise", "separated", "all_classified", "fiber_diameter"},
                {}};
  summary.add({i64(cfg.n), r.delta_hat, r.neighborhood_u, r.u_star, r.max_graph_dist_near_diagonal, r.margin,
               r.noise, r.noise > 0.0 ? r.margin / r.noise : kNaN, r.separated, r.all_classified,
               sc.report.thresholds.fiber_diameter});
  return {sweep, summary};
}

std::vector<Table> run_subnil(const RunConfig& cfg, const NilSystem& sys) {
  const auto catalog =
      default_catalog(sys.space, derive_seed(cfg.seed, kHaarStream), cfg.translates, cfg.max_q, cfg.samples);
  Table t{"diameters", {"index", "label", "kind", "q1", "q2", "diameter"}, {}};
  double min_d = std::numeric_limits<double>::infinity();
  double fiber_lo = std::numeric_limits<double>::infinity(), fiber_hi = 0.0, central = kNaN;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const auto& d = catalog[i];
    const double diam = subnil_diameter(d, sys.metric, derive_seed(cfg.seed, kSubnilStream + i));
    min_d = std::min(min_d, diam);
    std::string kind = "subtorus";
    if (d.kind == SubnilKind::central_fiber || d.kind == SubnilKind::translated_central_fiber) {
      kind = d.kind == SubnilKind::central_fiber ? "central_fiber" : "translated_central_fiber";
      fiber_lo = std::min(fiber_lo, diam);
      fiber_hi = std::max(fiber_hi, diam);
      if (d.kind == SubnilKind::central_fiber) central = diam;
    }
    t.add({i64(i), d.label(), kind, static_cast<std::int64_t>(d.q1), static_cast<std::int64_t>(d.q2), diam});
  }
  const double spread = std::isfinite(central) && central > 0.0 ? (fiber_hi - fiber_lo) / central : kNaN;
  const double singleton =
      subnil_diameter(SubnilDescriptor::singleton(base_point(sys.space)), sys.metric, cfg.seed);
  Table summary{"summary",
                {"descriptors", "min_diameter", "central_fiber_diameter", "fiber_relative_spread",
                 "singleton_diameter"},
                {}};
  summary.add({i64(catalog.size()), min_d, central, spread, singleton});
  return {t, summary};
}

bool has_format(const RunConfig& cfg, std::string_view fmt) {
  std::istringstream fs(cfg.formats);
  std::string item;
  while (std::getline(fs, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b != std::string::npos && item.substr(b, e - b + 1) == fmt) return true;
  }
  return false;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

ConfigError::ConfigError(std::vector<Diagnostic> diagnostics)
    : std::invalid_argument(diagnostics.empty() ? "invalid configuration"
                                                : "invalid configuration: " + diagnostics.front().message),
      diagnostics_(std::move(diagnostics)) {}

int ConfigError::exit_code() const {
  for (const auto& d : diagnostics_) {
    if (d.kind != DiagnosticKind::budget) return kExitConfig;
  }
  return diagnostics_.empty() ? kExitConfig : kExitBudget;
}

NilSystem build_system(const RunConfig& cfg) {
  const double a = eval_expression(cfg.alpha);
  const double b = eval_expression(cfg.beta);
  const double g = eval_expression(cfg.gamma);
  NilSystem sys;
  if (cfg.system == "heisenberg") {
    sys = NilSystem::heisenberg(a, b, g);
  } else if (cfg.system == "torus") {
    std::vector<double> shift{a, b, g};
    if (cfg.torus_dim < 1 || cfg.torus_dim > 3) throw std::invalid_argument("torus dimension must be 1, 2 or 3");
    shift.resize(static_cast<std::size_t>(cfg.torus_dim));
    sys = NilSystem::torus(shift);
  } else {
    throw std::invalid_argument("unknown system '" + cfg.system + "'");
  }
  sys.metric.gamma_window = cfg.gamma_window;
  sys.metric.vertical_weight = cfg.vertical_weight;
  return sys;
}

ResultEnvelope run(const RunConfig& cfg) {
  if (auto diags = validate(cfg); !diags.empty()) throw ConfigError(std::move(diags));
  const auto start = std::chrono::steady_clock::now();
  const NilSystem sys = build_system(cfg);

  ResultEnvelope env;
  env.config = cfg;
  env.tool_version = std::string(tool_version());
  env.command = std::string(to_string(cfg.command));
  env.seed = cfg.seed;
  switch (cfg.command) {
    case Command::orbit: env.tables = run_orbit(cfg, sys); break;
    case Command::integrate: env.tables = run_integrate(cfg, sys); break;
    case Command::seminorm: env.tables = run_seminorm(cfg, sys); break;
    case Command::joining: env.tables = run_joining(cfg, sys); break;
    case Command::rigidity_sweep: env.tables = run_sweep(cfg, sys); break;
    case Command::subnil_probe: env.tables = run_subnil(cfg, sys); break;
  }
  env.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return env;
}

std::vector<Chart> charts_for(const ResultEnvelope& env) {
  std::vector<Chart> out;
  if (env.command != to_string(Command::rigidity_sweep)) return out;
  const Table& sweep = env.table("sweep");
  const std::size_t fam = sweep.column("family");
  Series dist{"graph family: distance", {}, {}};
  Series graph{"graph family: graphness", {}, {}};
  for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
    if (std::get<std::string>(sweep.rows[i][fam]) != "graph") continue;
    const double u = sweep.number(i, "parameter");
    dist.x.push_back(u);
    dist.y.push_back(sweep.number(i, "dist_to_diagonal"));
    graph.x.push_back(u);
    graph.y.push_back(sweep.number(i, "graphness"));
  }
  Chart c{"dist_vs_u", "Graph family vs the non-graph gap", "u (log2 scale)", "weak-* distance to diagonal",
          true, {dist, graph}};
  if (!dist.x.empty()) {
    const double delta = env.table("summary").number(0, "delta_hat");
    const auto [lo, hi] = std::minmax_element(dist.x.begin(), dist.x.end());
    c.series.push_back({"non-graph gap", {*lo, *hi}, {delta, delta}});
  }
  out.push_back(std::move(c));
  return out;
}

std::vector<std::string> write_outputs(const ResultEnvelope& env, const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  const RunConfig& cfg = env.config;
  const bool want_json = has_format(cfg, "json"), want_csv = has_format(cfg, "csv"),
             want_svg = has_format(cfg, "svg");
  if (!want_json && !want_csv && !want_svg) return written;
  fs::create_directories(dir);
  std::string stem = cfg.name.empty() ? env.command : cfg.name;
  const fs::path base(dir);
  if (want_json) {
    const auto p = base / (stem + ".json");
    write_file(p, to_json(env).dump(2) + "\n");
    written.push_back(p.string());
  }
  if (want_csv) {
    for (const auto& t : env.tables) {
      const auto p = base / (stem + "_" + t.name + ".csv");
      write_file(p, to_csv(t));
      written.push_back(p.string());
    }
  }
  if (want_svg) {
    for (const auto& c : charts_for(env)) {
      const auto p = base / (stem + "_" + c.name + ".svg");
      write_file(p, to_svg(c));
      written.push_back(p.string());
    }
  }
  return written;
}

json error_object(std::string_view kind, int exit_code, std::string_view message,
                  const std::vector<Diagnostic>& diagnostics) {
  json e;
  e["kind"] = kind;
  e["exit_code"] = exit_code;
  e["message"] = message;
  json list = json::array();
  for (const auto& d : diagnostics) {
    json item;
    item["kind"] = to_string(d.kind);
    item["field"] = d.field;
    item["message"] = d.message;
    list.push_back(std::move(item));
  }
  e["diagnostics"] = std::move(list);
  json j;
  j["error"] = std::move(e);
  return j;
}

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err, bool print_envelope) {
  try {
    const ResultEnvelope env = run(cfg);
    const auto paths = write_outputs(env, resolve_out_dir(cfg));
    if (print_envelope) {
      out << to_json(env).dump(2) << '\n';
    } else {
      for (const auto& p : paths) out << p << '\n';
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    const int code = e.exit_code();
    err << error_object(code == kExitBudget ? "budget" : "config", code, e.what(), e.diagnostics()).dump(2) << '\n';
    return code;
  } catch (const BudgetExceeded& e) {
    err << error_object("budget", kExitBudget, e.what()).dump(2) << '\n';
    return kExitBudget;
  } catch (const std::invalid_argument& e) {
    err << error_object("config", kExitConfig, e.what()).dump(2) << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << error_object("runtime", kExitRuntime, e.what()).dump(2) << '\n';
    return kExitRuntime;
  }
}

}  // namespace nillab::cli
