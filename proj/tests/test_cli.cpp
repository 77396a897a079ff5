#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nillab/cli/config.hpp"
#include "nillab/cli/envelope.hpp"
#include "nillab/cli/run.hpp"

using namespace nillab;
using namespace nillab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("nillab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Minimal RFC 4180 reader for checking the writer.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows(1);
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      rows.back().push_back(field);
      field.clear();
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      rows.back().push_back(field);
      field.clear();
      rows.emplace_back();
      ++i;
    } else {
      field += c;
    }
  }
  if (rows.back().empty()) rows.pop_back();
  return rows;
}

RunConfig small(Command c) {
  RunConfig cfg;
  cfg.command = c;
  cfg.formats = "json";
  cfg.n = 2000;
  cfg.n_mc = 2000;
  cfg.n_ref = 2000;
  cfg.orbit_length = 50;
  cfg.n_outer = 16;
  cfg.n_base = 2000;
  cfg.n_side = 8;
  cfg.n_cube_mc = 20;
  cfg.u_grid = "1/2, 1/16";
  cfg.samples = 50;
  cfg.translates = 2;
  cfg.max_q = 2;
  return cfg;
}

bool has_kind(const std::vector<Diagnostic>& ds, DiagnosticKind k, const std::string& field) {
  for (const auto& d : ds) {
    if (d.kind == k && d.field == field) return true;
  }
  return false;
}

}  // namespace

TEST(Config, DefaultsValidate) {
  EXPECT_TRUE(validate(RunConfig{}).empty());
  for (auto c : {Command::orbit, Command::integrate, Command::seminorm, Command::joining, Command::rigidity_sweep,
                 Command::subnil_probe}) {
    RunConfig cfg;
    cfg.command = c;
    EXPECT_TRUE(validate(cfg).empty()) << to_string(c);
    EXPECT_EQ(parse_command(to_string(c)), c);
  }
  EXPECT_THROW(parse_command("sweep"), std::invalid_argument);
}

TEST(Config, StepAboveThreeIsABudgetDiagnostic) {
  RunConfig cfg;
  cfg.command = Command::seminorm;
  cfg.k = 5;
  const auto ds = validate(cfg);
  ASSERT_FALSE(ds.empty());
  EXPECT_TRUE(has_kind(ds, DiagnosticKind::budget, "seminorm.k"));
  EXPECT_EQ(ConfigError(ds).exit_code(), kExitBudget);
  cfg.k = 0;
  EXPECT_EQ(ConfigError(validate(cfg)).exit_code(), kExitConfig);
}

TEST(Config, OversizedCubeEstimateIsABudgetDiagnostic) {
  RunConfig cfg;
  cfg.command = Command::seminorm;
  cfg.k = 3;
  cfg.estimator = "cube";
  cfg.n_side = 4096;
  EXPECT_TRUE(has_kind(validate(cfg), DiagnosticKind::budget, "seminorm.n_side"));
}

TEST(Config, RationalShiftIsACertificationDiagnostic) {
  RunConfig cfg;
  cfg.command = Command::joining;
  cfg.kind = "counterexample";
  cfg.s = "1/2";
  EXPECT_TRUE(has_kind(validate(cfg), DiagnosticKind::certification, "system.s"));
  cfg = RunConfig{};
  cfg.s_grid = "sqrt(5) - 2, 0.5";
  EXPECT_TRUE(has_kind(validate(cfg), DiagnosticKind::certification, "sweep.s_grid"));
}

TEST(Config, ReportsBadValues) {
  RunConfig cfg;
  cfg.alpha = "sqrt(";
  cfg.gamma_window = 1;
  cfg.formats = "json,pdf";
  cfg.system = "torus";
  cfg.torus_dim = 4;
  const auto ds = validate(cfg);
  EXPECT_TRUE(has_kind(ds, DiagnosticKind::config, "system.alpha"));
  EXPECT_TRUE(has_kind(ds, DiagnosticKind::config, "metric.gamma_window"));
  EXPECT_TRUE(has_kind(ds, DiagnosticKind::config, "run.formats"));
  EXPECT_TRUE(has_kind(ds, DiagnosticKind::config, "system.torus_dim"));
}

TEST(Config, ApplySettingByKeyFlagAndBareName) {
  RunConfig cfg;
  EXPECT_TRUE(apply_setting(cfg, "seminorm.k", "3"));
  EXPECT_EQ(cfg.k, 3);
  EXPECT_TRUE(apply_setting(cfg, "n-side", "32"));
  EXPECT_EQ(cfg.n_side, 32u);
  EXPECT_TRUE(apply_setting(cfg, "system", "torus"));
  EXPECT_EQ(cfg.system, "torus");
  EXPECT_TRUE(apply_setting(cfg, "n", "1e5"));
  EXPECT_EQ(cfg.n, 100000u);
  EXPECT_TRUE(apply_setting(cfg, "emit_points", "true"));
  EXPECT_TRUE(cfg.emit_points);
  EXPECT_TRUE(apply_setting(cfg, "command", "subnil-probe"));
  EXPECT_EQ(cfg.command, Command::subnil_probe);
  EXPECT_EQ(get_setting(cfg, "seminorm.k"), "3");
  EXPECT_FALSE(apply_setting(cfg, "no_such_key", "1"));
  EXPECT_THROW(apply_setting(cfg, "seminorm.k", "three"), std::invalid_argument);
  EXPECT_THROW(apply_setting(cfg, "n", "-4"), std::invalid_argument);
}

TEST(Config, IniRoundTripAndUnknownKeys) {
  const auto dir = scratch_dir("ini");
  RunConfig cfg;
  cfg.command = Command::joining;
  cfg.kind = "vertical";
  cfg.u = "1/8";
  cfg.n = 1234;
  cfg.bin_size = 0.1;
  {
    std::ofstream(dir / "a.ini") << to_ini(cfg);
  }
  RunConfig back;
  load_ini(back, (dir / "a.ini").string());
  EXPECT_EQ(back, cfg);

  {
    std::ofstream(dir / "b.ini") << "[seminorm]\nk = 3\nbogus = 1\n";
  }
  RunConfig b;
  load_ini(b, (dir / "b.ini").string());
  EXPECT_EQ(b.k, 3);
  ASSERT_EQ(b.load_errors.size(), 1u);
  EXPECT_FALSE(validate(b).empty());
  EXPECT_THROW(load_ini(b, (dir / "missing.ini").string()), std::invalid_argument);
}

TEST(Config, JsonRoundTrip) {
  RunConfig cfg = small(Command::seminorm);
  cfg.f = "conj:vchar";
  cfg.seed = 18446744073709551615ull;
  EXPECT_EQ(config_from_json(to_json(cfg)), cfg);
  const auto bad = config_from_json(json{{"seminorm", {{"k", "x"}}}});
  EXPECT_EQ(bad.load_errors.size(), 1u);
  EXPECT_FALSE(validate(bad).empty());
}

TEST(Config, ExpressionLists) {
  const auto v = parse_expression_list("1/2, sqrt(4)/8 ,0");
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[1], 0.25);
  EXPECT_THROW(parse_expression_list("1/2,,3"), std::invalid_argument);
  EXPECT_THROW(parse_expression_list(""), std::invalid_argument);
}

TEST(Config, OutDirFallsBackToEnvironment) {
  RunConfig cfg;
  ::setenv("NILLAB_OUT_DIR", "/tmp/nillab_env_out", 1);
  EXPECT_EQ(resolve_out_dir(cfg), "/tmp/nillab_env_out");
  cfg.out_dir = "explicit";
  EXPECT_EQ(resolve_out_dir(cfg), "explicit");
  ::unsetenv("NILLAB_OUT_DIR");
  cfg.out_dir.clear();
  EXPECT_EQ(resolve_out_dir(cfg), ".");
}

TEST(Envelope, CarriesConfigVersionAndSeed) {
  const auto cfg = small(Command::orbit);
  const auto env = run(cfg);
  EXPECT_EQ(env.command, "orbit");
  EXPECT_EQ(env.tool_version, std::string(tool_version()));
  EXPECT_EQ(env.seed, cfg.seed);
  EXPECT_GE(env.wall_clock_seconds, 0.0);
  EXPECT_EQ(env.config, cfg);
  const auto& t = env.table("orbit");
  EXPECT_EQ(t.rows.size(), 50u);
  EXPECT_THROW(env.table("nope"), std::out_of_range);

  const auto j = to_json(env);
  for (const char* key : {"tool", "tool_version", "command", "seed", "wall_clock_seconds", "config", "payload"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(envelope_from_json(j), env);
  EXPECT_THROW(envelope_from_json(json{{"tool", "nillab"}}), std::invalid_argument);
}

TEST(Envelope, RerunFromEchoedConfigReproducesPayload) {
  for (auto c : {Command::orbit, Command::integrate, Command::seminorm, Command::joining, Command::subnil_probe}) {
    const auto first = run(small(c));
    const auto again = run(config_from_json(to_json(first).at("config")));
    EXPECT_EQ(payload_json(first).dump(), payload_json(again).dump()) << to_string(c);
  }
}

TEST(Envelope, NonFiniteValuesBecomeNullAndEmptyFields) {
  Table t{"t", {"a", "b"}, {}};
  t.add({std::numeric_limits<double>::quiet_NaN(), std::string("x,\"y\"")});
  EXPECT_TRUE(to_json(t)["rows"][0][0].is_null());
  EXPECT_EQ(to_csv(t), "a,b\r\n,\"x,\"\"y\"\"\"\r\n");
  EXPECT_THROW(t.add({1.0}), std::invalid_argument);
}

TEST(Outputs, CsvAgreesWithJson) {
  const auto dir = scratch_dir("csv");
  auto cfg = small(Command::rigidity_sweep);
  cfg.formats = "json,csv,svg";
  cfg.out_dir = dir.string();
  std::ostringstream out, err;
  ASSERT_EQ(execute(cfg, out, err), kExitOk) << err.str();
  const auto j = json::parse(slurp(dir / "rigidity-sweep.json"));
  for (const char* name : {"sweep", "summary"}) {
    const auto rows = parse_csv(slurp(dir / (std::string("rigidity-sweep_") + name + ".csv")));
    const auto& jt = j["payload"][name];
    ASSERT_EQ(rows.size(), jt["rows"].size() + 1) << name;
    for (std::size_t c = 0; c < rows[0].size(); ++c) EXPECT_EQ(rows[0][c], jt["columns"][c].get<std::string>());
    for (std::size_t r = 0; r < jt["rows"].size(); ++r) {
      for (std::size_t c = 0; c < rows[r + 1].size(); ++c) {
        const auto& cell = jt["rows"][r][c];
        const std::string& field = rows[r + 1][c];
        if (cell.is_number_float()) {
          EXPECT_EQ(std::stod(field), cell.get<double>()) << name << " " << r << "," << c;
        } else if (cell.is_string()) {
          EXPECT_EQ(field, cell.get<std::string>());
        } else if (cell.is_boolean()) {
          EXPECT_EQ(field, cell.get<bool>() ? "true" : "false");
        } else if (cell.is_null()) {
          EXPECT_TRUE(field.empty());
        } else {
          EXPECT_EQ(field, cell.dump());
        }
      }
    }
  }
  const auto svg = slurp(dir / "rigidity-sweep_dist_vs_u.svg");
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
}

TEST(Outputs, RerunsAreByteIdenticalApartFromWallClock) {
  const auto dir1 = scratch_dir("rerun1");
  const auto dir2 = scratch_dir("rerun2");
  auto cfg = small(Command::joining);
  cfg.kind = "counterexample";
  cfg.formats = "csv";
  std::ostringstream out, err;
  cfg.out_dir = dir1.string();
  ASSERT_EQ(execute(cfg, out, err), kExitOk);
  cfg.out_dir = dir2.string();
  ASSERT_EQ(execute(cfg, out, err), kExitOk);
  EXPECT_EQ(slurp(dir1 / "joining_report.csv"), slurp(dir2 / "joining_report.csv"));
}

TEST(Outputs, ExitCodesAndErrorObjects) {
  const auto dir = scratch_dir("exit");
  auto cfg = small(Command::seminorm);
  cfg.out_dir = dir.string();
  cfg.k = 4;
  std::ostringstream out, err;
  EXPECT_EQ(execute(cfg, out, err), kExitBudget);
  auto e = json::parse(err.str());
  EXPECT_EQ(e["error"]["exit_code"], kExitBudget);
  EXPECT_EQ(e["error"]["kind"], "budget");

  cfg = small(Command::joining);
  cfg.out_dir = dir.string();
  cfg.kind = "counterexample";
  cfg.s = "0.5";
  std::ostringstream out2, err2;
  EXPECT_EQ(execute(cfg, out2, err2), kExitConfig);
  e = json::parse(err2.str());
  EXPECT_EQ(e["error"]["diagnostics"][0]["kind"], "certification");

  cfg = small(Command::orbit);
  cfg.out_dir = dir.string();
  cfg.alpha = "0";
  cfg.beta = "0";
  std::ostringstream out3, err3;
  EXPECT_EQ(execute(cfg, out3, err3), kExitConfig);
  EXPECT_TRUE(fs::is_empty(dir));
}

TEST(Outputs, TorusCommandsRun) {
  auto cfg = small(Command::joining);
  cfg.system = "torus";
  cfg.torus_dim = 2;
  cfg.kind = "translation";
  const auto env = run(cfg);
  EXPECT_EQ(env.table("report").rows.size(), 1u);
  cfg.command = Command::subnil_probe;
  EXPECT_NO_THROW(run(cfg));
  cfg.kind = "counterexample";
  cfg.command = Command::joining;
  EXPECT_THROW(run(cfg), ConfigError);
}
