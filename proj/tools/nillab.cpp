#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "nillab/cli/config.hpp"
#include "nillab/cli/run.hpp"

using namespace nillab::cli;

int main(int argc, char** argv) {
  CLI::App app{"nillab: numerical experiments on nilsystems, their seminorms and self-joinings"};
  app.set_version_flag("--version", std::string(tool_version()));

  std::string command;
  std::string config_path;
  std::vector<std::string> sets;
  bool print_envelope = false;
  bool validate_only = false;
  bool dump_config = false;

  app.add_option("command", command, "orbit | integrate | seminorm | joining | rigidity-sweep | subnil-probe");
  app.add_option("-c,--config", config_path, "INI file with [section] key = value settings");
  app.add_option("--set", sets, "section.key=value override (repeatable)")
      ->allow_extra_args(false)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_flag("--print", print_envelope, "print the result envelope as JSON on stdout");
  app.add_flag("--validate", validate_only, "report diagnostics and exit without running");
  app.add_flag("--dump-config", dump_config, "print the effective config as INI and exit");

  std::map<std::string, std::pair<CLI::Option*, std::string>> flags;
  for (const auto& s : settings()) {
    if (s.flag == "command") continue;
    auto& slot = flags[s.flag];
    std::string names = "--" + s.flag;
    if (s.flag.find('_') != std::string::npos) {
      std::string dashed = s.flag;
      for (char& c : dashed) {
        if (c == '_') c = '-';
      }
      names += ",--" + dashed;
    }
    slot.first = app.add_option(names, slot.second, s.help)->group(s.section);
  }

  CLI11_PARSE(app, argc, argv);

  RunConfig cfg;
  auto fail = [](std::string_view message) {
    std::cerr << error_object("config", kExitConfig, message).dump(2) << '\n';
    return kExitConfig;
  };
  auto apply = [&](const std::string& key, const std::string& value) {
    try {
      if (!apply_setting(cfg, key, value)) cfg.load_errors.push_back("unknown field '" + key + "'");
    } catch (const std::invalid_argument& e) {
      cfg.load_errors.push_back("field '" + key + "': " + e.what());
    }
  };

  if (!config_path.empty()) {
    try {
      load_ini(cfg, config_path);
    } catch (const std::exception& e) {
      return fail(e.what());
    }
  }
  for (const auto& [flag, slot] : flags) {
    if (slot.first->count() > 0) apply(flag, slot.second);
  }
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      cfg.load_errors.push_back("--set expects key=value, got '" + s + "'");
      continue;
    }
    apply(s.substr(0, eq), s.substr(eq + 1));
  }
  if (!command.empty()) apply("run.command", command);

  if (dump_config) {
    std::cout << to_ini(cfg);
    return kExitOk;
  }
  if (validate_only) {
    const auto diags = validate(cfg);
    if (diags.empty()) {
      std::cout << "{\"diagnostics\": []}\n";
      return kExitOk;
    }
    const int code = ConfigError(diags).exit_code();
    std::cerr << error_object(code == kExitBudget ? "budget" : "config", code, "invalid configuration", diags).dump(2)
              << '\n';
    return code;
  }
  return execute(cfg, std::cout, std::cerr, print_envelope);
}
