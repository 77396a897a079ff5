#pragma once

// Dispatch of a RunConfig to the experiment it names, output writing and the
// exit-code contract of the command-line tool.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "nillab/cli/config.hpp"
#include "nillab/cli/envelope.hpp"
#include "nillab/systems.hpp"

namespace nillab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBudget = 3;

/// Thrown by run() when validate() reports problems.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }
  /// kExitBudget when every diagnostic is a budget one, else kExitConfig.
  int exit_code() const;

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// The system described by the [system] and [metric] sections.
NilSystem build_system(const RunConfig& cfg);

/// Validates and runs the configured command. Throws ConfigError,
/// BudgetExceeded, or std::invalid_argument from the compute modules.
ResultEnvelope run(const RunConfig& cfg);

/// Charts derived from the payload (only sweeps have curves).
std::vector<Chart> charts_for(const ResultEnvelope& env);

/// Writes the formats requested in env.config.formats into `dir` and returns
/// the paths written, in a fixed order.
std::vector<std::string> write_outputs(const ResultEnvelope& env, const std::string& dir);

/// Machine-readable error object.
json error_object(std::string_view kind, int exit_code, std::string_view message,
                  const std::vector<Diagnostic>& diagnostics = {});

/// Validate, run and write outputs. Errors go to `err` as a JSON object;
/// `out` receives either the envelope (print_envelope) or the written paths.
int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err, bool print_envelope = false);

}  // namespace nillab::cli
