#include "nillab/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <type_traits>
#include <variant>

#include "nillab/joinings.hpp"
#include "nillab/params.hpp"
#include "nillab/seminorms.hpp"
#include "nillab/systems.hpp"

namespace nillab::cli {

namespace {

// std::uint64_t and std::size_t coincide on the supported platforms.
static_assert(std::is_same_v<std::uint64_t, std::size_t>);

using Member = std::variant<std::string RunConfig::*, double RunConfig::*, int RunConfig::*,
                            std::size_t RunConfig::*, bool RunConfig::*,
                            Command RunConfig::*>;

struct Setting {
  SettingInfo info;
  Member member;
};

const std::vector<Setting>& table() {
  static const std::vector<Setting> t = {
      {{"run", "command", "command", "orbit | integrate | seminorm | joining | rigidity-sweep | subnil-probe"},
       &RunConfig::command},
      {{"run", "seed", "seed", "master seed"}, &RunConfig::seed},
      {{"run", "out_dir", "out_dir", "output directory (default $NILLAB_OUT_DIR or .)"}, &RunConfig::out_dir},
      {{"run", "formats", "formats", "comma list of json, csv, svg"}, &RunConfig::formats},
      {{"run", "name", "name", "output file stem (default: command name)"}, &RunConfig::name},
      {{"system", "kind", "system", "heisenberg | torus"}, &RunConfig::system},
      {{"system", "torus_dim", "torus_dim", "torus dimension 1..3"}, &RunConfig::torus_dim},
      {{"system", "alpha", "alpha", "first rotation coordinate (expression)"}, &RunConfig::alpha},
      {{"system", "beta", "beta", "second rotation coordinate (expression)"}, &RunConfig::beta},
      {{"system", "gamma", "gamma", "central rotation coordinate (expression)"}, &RunConfig::gamma},
      {{"system", "s", "s", "counterexample shift (expression)"}, &RunConfig::s},
      {{"metric", "gamma_window", "gamma_window", "lattice search radius"}, &RunConfig::gamma_window},
      {{"metric", "vertical_weight", "vertical_weight", "weight of the central coordinate"},
       &RunConfig::vertical_weight},
      {{"sampling", "n", "n", "Birkhoff length / joining sample count"}, &RunConfig::n},
      {{"sampling", "n_mc", "n_mc", "Haar Monte Carlo sample count"}, &RunConfig::n_mc},
      {{"sampling", "orbit_length", "orbit_length", "points emitted by the orbit command"},
       &RunConfig::orbit_length},
      {{"sampling", "scheme", "scheme", "direct-haar | orbit-pushforward"}, &RunConfig::scheme},
      {{"observable", "f", "f", "observable spec: const:re[,im] | char:m1[,m2[,m3]] | vchar[:m] | conj:..."},
       &RunConfig::f},
      {{"seminorm", "k", "k", "seminorm step (<= 3)"}, &RunConfig::k},
      {{"seminorm", "estimator", "estimator", "recursive | cube | both"}, &RunConfig::estimator},
      {{"seminorm", "n_outer", "n_outer", "recursive estimator: outer averaging length"}, &RunConfig::n_outer},
      {{"seminorm", "n_base", "n_base", "recursive estimator: base orbit length"}, &RunConfig::n_base},
      {{"seminorm", "n_side", "n_side", "cube estimator: side length"}, &RunConfig::n_side},
      {{"seminorm", "n_mc", "n_cube_mc", "cube estimator: Haar base points"}, &RunConfig::n_cube_mc},
      {{"seminorm", "stability_seeds", "stability_seeds", "extra seeds for the stability half-width"},
       &RunConfig::stability_seeds},
      {{"seminorm", "max_products", "max_products", "estimator budget in observable products"},
       &RunConfig::max_products},
      {{"joining", "kind", "kind", "diagonal | vertical | counterexample | translation"}, &RunConfig::kind},
      {{"joining", "u", "u", "vertical rotation amount (expression)"}, &RunConfig::u},
      {{"joining", "v", "v", "torus translation vector (expression list)"}, &RunConfig::v},
      {{"joining", "emit_points", "emit_points", "also emit the sample pairs"}, &RunConfig::emit_points},
      {{"family", "max_freq", "max_freq", "test-function frequency cutoff"}, &RunConfig::max_freq},
      {{"thresholds", "bin_size", "bin_size", "graphness cell side"}, &RunConfig::bin_size},
      {{"thresholds", "min_count", "min_count", "minimum points per graphness cell"}, &RunConfig::min_count},
      {{"thresholds", "graph_like_factor", "graph_like_factor", "graph-like if graphness <= factor * bin_size"},
       &RunConfig::graph_like_factor},
      {{"thresholds", "non_graph_fraction", "non_graph_fraction",
        "non-graph if graphness >= fraction * fiber diameter"},
       &RunConfig::non_graph_fraction},
      {{"thresholds", "n_ref", "n_ref", "Haar reference size for marginal errors"}, &RunConfig::n_ref},
      {{"sweep", "u_grid", "u_grid", "graph-family parameters (expression list)"}, &RunConfig::u_grid},
      {{"sweep", "s_grid", "s_grid", "counterexample parameters (expression list)"}, &RunConfig::s_grid},
      {{"sweep", "u_star", "u_star", "graph parameters u <= u_star count as near the diagonal"},
       &RunConfig::u_star},
      {{"subnil", "translates", "translates", "translated central fibers in the catalog"},
       &RunConfig::translates},
      {{"subnil", "max_q", "max_q", "largest subtorus slope entry"}, &RunConfig::max_q},
      {{"subnil", "samples", "samples", "points per subnilmanifold"}, &RunConfig::samples},
  };
  return t;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string normalize(std::string_view key) {
  std::string out(trim(key));
  for (char& c : out) {
    if (c == '-') c = '_';
  }
  return out;
}

const Setting* find(std::string_view raw) {
  const std::string key = normalize(raw);
  for (const auto& s : table()) {
    if (s.info.section + "." + s.info.key == key) return &s;
  }
  for (const auto& s : table()) {
    if (s.info.flag == key) return &s;
  }
  const Setting* hit = nullptr;
  for (const auto& s : table()) {
    if (s.info.key == key) {
      if (hit) return nullptr;  // ambiguous bare key
      hit = &s;
    }
  }
  return hit;
}

double parse_double(std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw std::invalid_argument("not a number: '" + t + "'");
  }
  return v;
}

template <typename Int>
Int parse_integer(std::string_view text) {
  const std::string t = trim(text);
  Int v{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (!t.empty() && ec == std::errc{} && ptr == t.data() + t.size()) return v;
  // Allow integral values written in floating form, e.g. "1e5".
  const double d = parse_double(t);
  if (d != std::floor(d) || d < static_cast<double>(std::numeric_limits<Int>::min()) ||
      d > static_cast<double>(std::numeric_limits<Int>::max())) {
    throw std::invalid_argument("not an integer in range: '" + t + "'");
  }
  return static_cast<Int>(d);
}

bool parse_bool(std::string_view text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw std::invalid_argument("not a boolean: '" + t + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void diag(std::vector<Diagnostic>& out, DiagnosticKind kind, std::string field, std::string message) {
  out.push_back({kind, std::move(field), std::move(message)});
}

// Evaluates an expression field, recording a diagnostic on failure.
std::optional<double> checked_expr(std::vector<Diagnostic>& out, const std::string& field,
                                   const std::string& text) {
  try {
    return eval_expression(text);
  } catch (const std::invalid_argument& e) {
    diag(out, DiagnosticKind::config, field, e.what());
    return std::nullopt;
  }
}

std::optional<std::vector<double>> checked_list(std::vector<Diagnostic>& out, const std::string& field,
                                                const std::string& text) {
  try {
    return parse_expression_list(text);
  } catch (const std::invalid_argument& e) {
    diag(out, DiagnosticKind::config, field, e.what());
    return std::nullopt;
  }
}

std::string relation_text(const IntegerRelation& r) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < r.coefficients.size(); ++i) os << (i ? ", " : "") << r.coefficients[i];
  os << ')';
  return os.str();
}

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::orbit: return "orbit";
    case Command::integrate: return "integrate";
    case Command::seminorm: return "seminorm";
    case Command::joining: return "joining";
    case Command::rigidity_sweep: return "rigidity-sweep";
    case Command::subnil_probe: return "subnil-probe";
  }
  return "unknown";
}

Command parse_command(std::string_view text) {
  std::string t = trim(text);
  for (char& c : t) {
    if (c == '_') c = '-';
  }
  for (Command c : {Command::orbit, Command::integrate, Command::seminorm, Command::joining,
                    Command::rigidity_sweep, Command::subnil_probe}) {
    if (t == to_string(c)) return c;
  }
  throw std::invalid_argument("unknown command '" + std::string(text) + "'");
}

std::string_view to_string(DiagnosticKind k) {
  switch (k) {
    case DiagnosticKind::config: return "config";
    case DiagnosticKind::budget: return "budget";
    case DiagnosticKind::certification: return "certification";
  }
  return "unknown";
}

const std::vector<SettingInfo>& settings() {
  static const std::vector<SettingInfo> infos = [] {
    std::vector<SettingInfo> v;
    for (const auto& s : table()) v.push_back(s.info);
    return v;
  }();
  return infos;
}

bool apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  const Setting* s = find(key);
  if (!s) return false;
  std::visit(Overloaded{
                 [&](std::string RunConfig::*m) { cfg.*m = trim(value); },
                 [&](double RunConfig::*m) { cfg.*m = parse_double(value); },
                 [&](int RunConfig::*m) { cfg.*m = parse_integer<int>(value); },
                 [&](std::size_t RunConfig::*m) { cfg.*m = parse_integer<std::size_t>(value); },
                 [&](bool RunConfig::*m) { cfg.*m = parse_bool(value); },
                 [&](Command RunConfig::*m) { cfg.*m = parse_command(value); },
             },
             s->member);
  return true;
}

std::string get_setting(const RunConfig& cfg, std::string_view key) {
  const Setting* s = find(key);
  if (!s) throw std::invalid_argument("unknown setting '" + std::string(key) + "'");
  return std::visit(Overloaded{
                        [&](std::string RunConfig::*m) { return cfg.*m; },
                        [&](double RunConfig::*m) { return format_double(cfg.*m); },
                        [&](int RunConfig::*m) { return std::to_string(cfg.*m); },
                        [&](std::size_t RunConfig::*m) { return std::to_string(cfg.*m); },
                        [&](bool RunConfig::*m) { return std::string(cfg.*m ? "true" : "false"); },
                        [&](Command RunConfig::*m) { return std::string(to_string(cfg.*m)); },
                    },
                    s->member);
}

void load_ini(RunConfig& cfg, const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument("cannot read config file: " + std::string(e.what()));
  }
  auto apply = [&](const std::string& key, const std::string& value) {
    try {
      if (!apply_setting(cfg, key, value)) cfg.load_errors.push_back("unknown field '" + key + "'");
    } catch (const std::invalid_argument& e) {
      cfg.load_errors.push_back("field '" + key + "': " + e.what());
    }
  };
  for (const auto& [section, node] : tree) {
    if (node.empty()) {
      apply(section, node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) apply(section + "." + key, leaf.data());
  }
}

std::string to_ini(const RunConfig& cfg) {
  std::ostringstream os;
  std::string current;
  for (const auto& s : table()) {
    if (s.info.section != current) {
      if (!current.empty()) os << '\n';
      current = s.info.section;
      os << '[' << current << "]\n";
    }
    os << s.info.key << " = " << get_setting(cfg, s.info.section + "." + s.info.key) << '\n';
  }
  return os.str();
}

json to_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& s : table()) {
    json& slot = j[s.info.section][s.info.key];
    std::visit(Overloaded{
                   [&](std::string RunConfig::*m) { slot = cfg.*m; },
                   [&](double RunConfig::*m) { slot = cfg.*m; },
                   [&](int RunConfig::*m) { slot = cfg.*m; },
                   [&](std::size_t RunConfig::*m) { slot = cfg.*m; },
                   [&](bool RunConfig::*m) { slot = cfg.*m; },
                   [&](Command RunConfig::*m) { slot = std::string(to_string(cfg.*m)); },
               },
               s.member);
  }
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  if (!j.is_object()) {
    cfg.load_errors.push_back("config echo must be a JSON object");
    return cfg;
  }
  for (const auto& [section, body] : j.items()) {
    if (!body.is_object()) {
      cfg.load_errors.push_back("section '" + section + "' must be an object");
      continue;
    }
    for (const auto& [key, value] : body.items()) {
      const std::string full = section + "." + key;
      const std::string text = value.is_string() ? value.get<std::string>() : value.dump();
      try {
        if (!apply_setting(cfg, full, text)) cfg.load_errors.push_back("unknown field '" + full + "'");
      } catch (const std::invalid_argument& e) {
        cfg.load_errors.push_back("field '" + full + "': " + e.what());
      }
    }
  }
  return cfg;
}

std::vector<double> parse_expression_list(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    out.push_back(eval_expression(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string resolve_out_dir(const RunConfig& cfg) {
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("NILLAB_OUT_DIR"); env && *env) return env;
  return ".";
}

std::vector<Diagnostic> validate(const RunConfig& cfg) {
  std::vector<Diagnostic> out;
  for (const auto& e : cfg.load_errors) diag(out, DiagnosticKind::config, "", e);
  const auto C = DiagnosticKind::config;

  // [run]
  {
    std::istringstream fs(cfg.formats);
    std::string item;
    while (std::getline(fs, item, ',')) {
      const std::string t = trim(item);
      if (t != "json" && t != "csv" && t != "svg") {
        diag(out, C, "run.formats", "unknown output format '" + t + "'");
      }
    }
  }

  // [system] and [metric]
  const bool heis = cfg.system == "heisenberg";
  if (!heis && cfg.system != "torus") diag(out, C, "system.kind", "system must be 'heisenberg' or 'torus'");
  if (!heis && (cfg.torus_dim < 1 || cfg.torus_dim > 3)) {
    diag(out, C, "system.torus_dim", "torus dimension must be 1, 2 or 3");
  }
  const auto alpha = checked_expr(out, "system.alpha", cfg.alpha);
  const auto beta = checked_expr(out, "system.beta", cfg.beta);
  const auto gamma = checked_expr(out, "system.gamma", cfg.gamma);
  const auto s = checked_expr(out, "system.s", cfg.s);
  if (cfg.gamma_window < 2 || cfg.gamma_window > 16) {
    diag(out, C, "metric.gamma_window", "lattice search radius must be in [2, 16]");
  }
  if (!(cfg.vertical_weight > 0.0)) diag(out, C, "metric.vertical_weight", "vertical weight must be positive");

  std::optional<NilSystem> sys;
  if (alpha && beta && gamma && (heis || (cfg.torus_dim >= 1 && cfg.torus_dim <= 3))) {
    if (heis) {
      sys = NilSystem::heisenberg(*alpha, *beta, *gamma);
    } else {
      std::vector<double> shift{*alpha, *beta, *gamma};
      shift.resize(static_cast<std::size_t>(cfg.torus_dim));
      sys = NilSystem::torus(shift);
    }
    if (sys->is_identity_rotation()) {
      diag(out, C, "system.alpha", "the rotation is trivial, so the system is not ergodic");
    } else if (const auto rel = find_small_relation(sys->certificate)) {
      diag(out, DiagnosticKind::certification, "system.alpha",
           "rotation parameters must be linearly independent over Q together with 1; found integer relation " +
               relation_text(*rel));
    }
  }

  // [sampling] and [observable]
  if (cfg.n == 0) diag(out, C, "sampling.n", "n must be >= 1");
  if (cfg.n_mc == 0) diag(out, C, "sampling.n_mc", "n_mc must be >= 1");
  if (cfg.orbit_length == 0) diag(out, C, "sampling.orbit_length", "orbit_length must be >= 1");
  try {
    parse_provenance(cfg.scheme);
  } catch (const std::invalid_argument& e) {
    diag(out, C, "sampling.scheme", e.what());
  }
  try {
    observables::parse(cfg.f);
  } catch (const std::invalid_argument& e) {
    diag(out, C, "observable.f", e.what());
  }

  // [family] and [thresholds]
  if (cfg.max_freq < 0 || cfg.max_freq > 7) diag(out, C, "family.max_freq", "max_freq must be in [0, 7]");
  if (!(cfg.bin_size > 0.0 && cfg.bin_size <= 1.0)) diag(out, C, "thresholds.bin_size", "bin_size must be in (0, 1]");
  if (cfg.min_count < 2) diag(out, C, "thresholds.min_count", "min_count must be >= 2");
  if (!(cfg.graph_like_factor > 0.0)) diag(out, C, "thresholds.graph_like_factor", "factor must be positive");
  if (!(cfg.non_graph_fraction > 0.0 && cfg.non_graph_fraction <= 1.0)) {
    diag(out, C, "thresholds.non_graph_fraction", "fraction must be in (0, 1]");
  }
  if (cfg.n_ref == 0) diag(out, C, "thresholds.n_ref", "n_ref must be >= 1");

  auto certify = [&](const std::string& field, double shift) {
    if (!sys || !heis) return;
    try {
      certify_shift(*sys, shift);
    } catch (const std::invalid_argument& e) {
      diag(out, DiagnosticKind::certification, field, e.what());
    }
  };

  switch (cfg.command) {
    case Command::orbit:
    case Command::integrate:
      break;
    case Command::seminorm: {
      if (cfg.k < 1) diag(out, C, "seminorm.k", "k must be >= 1");
      if (cfg.k > kMaxSeminormStep) {
        diag(out, DiagnosticKind::budget, "seminorm.k",
             "k = " + std::to_string(cfg.k) + " exceeds the hard ceiling k <= " + std::to_string(kMaxSeminormStep));
      }
      const bool rec = cfg.estimator == "recursive" || cfg.estimator == "both";
      const bool cube = cfg.estimator == "cube" || cfg.estimator == "both";
      if (!rec && !cube) diag(out, C, "seminorm.estimator", "estimator must be recursive, cube or both");
      if (cfg.n_outer == 0 || cfg.n_base == 0 || cfg.n_side == 0 || cfg.n_cube_mc == 0) {
        diag(out, C, "seminorm", "estimator lengths must be >= 1");
      }
      if (cfg.stability_seeds < 1) diag(out, C, "seminorm.stability_seeds", "need at least one stability seed");
      if (!(cfg.max_products > 0.0)) diag(out, C, "seminorm.max_products", "budget must be positive");
      if (cfg.k >= 2 && cfg.k <= kMaxSeminormStep) {
        if (rec && recursive_cost(cfg.k, cfg.n_outer, cfg.n_base) > cfg.max_products) {
          diag(out, DiagnosticKind::budget, "seminorm.n_outer",
               "recursive estimator cost " + format_double(recursive_cost(cfg.k, cfg.n_outer, cfg.n_base)) +
                   " exceeds max_products " + format_double(cfg.max_products));
        }
        if (cube && cube_cost(cfg.k, cfg.n_side, cfg.n_cube_mc) > cfg.max_products) {
          diag(out, DiagnosticKind::budget, "seminorm.n_side",
               "cube estimator cost " + format_double(cube_cost(cfg.k, cfg.n_side, cfg.n_cube_mc)) +
                   " exceeds max_products " + format_double(cfg.max_products));
        }
      }
      break;
    }
    case Command::joining: {
      const std::string& kd = cfg.kind;
      if (kd != "diagonal" && kd != "vertical" && kd != "counterexample" && kd != "translation") {
        diag(out, C, "joining.kind", "kind must be diagonal, vertical, counterexample or translation");
      } else if ((kd == "vertical" || kd == "counterexample") && !heis) {
        diag(out, C, "joining.kind", kd + " joinings need the Heisenberg system");
      } else if (kd == "translation" && heis) {
        diag(out, C, "joining.kind", "translation joinings need a torus system");
      }
      if (kd == "vertical") checked_expr(out, "joining.u", cfg.u);
      if (kd == "translation" && !heis) {
        if (const auto v = checked_list(out, "joining.v", cfg.v);
            v && v->size() != static_cast<std::size_t>(cfg.torus_dim)) {
          diag(out, C, "joining.v", "translation vector needs torus_dim entries");
        }
      }
      if (kd == "counterexample" && s) certify("system.s", *s);
      break;
    }
    case Command::rigidity_sweep: {
      if (!heis) diag(out, C, "system.kind", "the rigidity sweep needs the Heisenberg system");
      checked_list(out, "sweep.u_grid", cfg.u_grid);
      checked_expr(out, "sweep.u_star", cfg.u_star);
      if (const auto grid = checked_list(out, "sweep.s_grid", cfg.s_grid)) {
        for (double v : *grid) certify("sweep.s_grid", v);
      }
      break;
    }
    case Command::subnil_probe:
      if (cfg.translates < 0) diag(out, C, "subnil.translates", "translates must be >= 0");
      if (cfg.max_q < 1) diag(out, C, "subnil.max_q", "max_q must be >= 1");
      if (cfg.samples < 2) diag(out, C, "subnil.samples", "samples must be >= 2");
      if (!heis && cfg.torus_dim > 2) diag(out, C, "system.torus_dim", "subtori are catalogued on tori of dimension <= 2");
      break;
  }
  return out;
}

}  // namespace nillab::cli
