#pragma once

// Run configuration for the nillab command line: a flat set of settings
// grouped into INI-style sections, loadable from a file and overridable by
// flags, plus validation that reports every problem without running.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nillab/cli/json.hpp"

namespace nillab::cli {

enum class Command { orbit, integrate, seminorm, joining, rigidity_sweep, subnil_probe };

std::string_view to_string(Command c);
/// Accepts "rigidity-sweep" and "rigidity_sweep" alike. Throws std::invalid_argument.
Command parse_command(std::string_view text);

struct RunConfig {
  // [run]
  Command command = Command::rigidity_sweep;
  std::uint64_t seed = 1;
  std::string out_dir;  ///< empty: $NILLAB_OUT_DIR, else the working directory
  std::string formats = "json,csv,svg";
  std::string name;  ///< file stem; empty: the command name

  // [system]
  std::string system = "heisenberg";  ///< heisenberg | torus
  int torus_dim = 1;                  ///< torus shift = the first torus_dim of (alpha, beta, gamma)
  std::string alpha = "sqrt(2) - 1";
  std::string beta = "sqrt(3) - 1";
  std::string gamma = "0";
  std::string s = "sqrt(5) - 2";

  // [metric]
  int gamma_window = 3;
  double vertical_weight = 1.0;

  // [sampling]
  std::size_t n = 100000;
  std::size_t n_mc = 100000;
  std::size_t orbit_length = 1000;
  std::string scheme = "direct-haar";  ///< direct-haar | orbit-pushforward

  // [observable]
  std::string f = "char:1";

  // [seminorm]
  int k = 2;
  std::string estimator = "both";  ///< recursive | cube | both
  std::size_t n_outer = 1000;
  std::size_t n_base = 100000;
  std::size_t n_side = 64;
  std::size_t n_cube_mc = 200;
  int stability_seeds = 3;
  double max_products = 2e9;

  // [joining]
  std::string kind = "diagonal";  ///< diagonal | vertical | counterexample | translation
  std::string u = "1/16";
  std::string v = "1/4, 1/2";  ///< translation vector on tori
  bool emit_points = false;

  // [family] and [thresholds]
  int max_freq = 3;
  double bin_size = 0.05;
  std::size_t min_count = 20;
  double graph_like_factor = 3.0;
  double non_graph_fraction = 0.5;
  std::size_t n_ref = 100000;

  // [sweep]
  std::string u_grid = "1/2, 1/4, 1/8, 1/16, 1/32, 1/64, 1/128, 1/256";
  std::string s_grid = "sqrt(5) - 2";
  std::string u_star = "1/16";

  // [subnil]
  int translates = 10;
  int max_q = 10;
  std::size_t samples = 1000;

  /// Problems found while loading (unknown keys, unparsable values).
  std::vector<std::string> load_errors;

  bool operator==(const RunConfig&) const = default;
};

/// One entry of the settings table.
struct SettingInfo {
  std::string section;
  std::string key;
  std::string flag;  ///< long flag name without dashes
  std::string help;
};

const std::vector<SettingInfo>& settings();

/// Sets one value by "section.key", bare key or flag name. Returns false for
/// an unknown key; throws std::invalid_argument for an unparsable value.
bool apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Current value of a setting as text (the inverse of apply_setting).
std::string get_setting(const RunConfig& cfg, std::string_view key);

/// Reads an INI file. Unknown keys and bad values are recorded in
/// load_errors; an unreadable or malformed file throws std::runtime_error.
void load_ini(RunConfig& cfg, const std::string& path);
/// INI text with every setting, in table order.
std::string to_ini(const RunConfig& cfg);

/// Config echo: sections and keys in table order, typed values.
json to_json(const RunConfig& cfg);
/// Applies every key of an echo; unknown keys land in load_errors.
RunConfig config_from_json(const json& j);

enum class DiagnosticKind { config, budget, certification };

struct Diagnostic {
  DiagnosticKind kind = DiagnosticKind::config;
  std::string field;
  std::string message;
};

std::string_view to_string(DiagnosticKind k);

/// Every violation in the config, without running anything.
std::vector<Diagnostic> validate(const RunConfig& cfg);

/// Comma separated expression list, e.g. "1/2, sqrt(2) - 1".
std::vector<double> parse_expression_list(std::string_view text);

/// The output directory after applying the environment default.
std::string resolve_out_dir(const RunConfig& cfg);

}  // namespace nillab::cli
