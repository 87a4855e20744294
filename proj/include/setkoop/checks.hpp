#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "setkoop/control.hpp"
#include "setkoop/grid.hpp"
#include "setkoop/observable.hpp"
#include "setkoop/scenario.hpp"
#include "setkoop/vector_field.hpp"

namespace setkoop {

enum class CheckStatus { pass, fail, error, diverged };

std::string to_string(CheckStatus status);

struct CheckOutcome {
  std::string name;
  CheckStatus status = CheckStatus::fail;
  double worst_defect = 0.0;
  double tolerance = 0.0;
  std::string message;
  std::string csv;  // contents of <name>.csv
};

/// Everything a check needs, built once per run.
struct CheckContext {
  Scenario scenario;
  VectorField field;
  ControlSamplePtr controls;
  SpatialGrid grid;
  Observable phi;
  /// Constant signals followed by the seeded random signals.
  std::vector<ControlSignal> signals;
  std::uint64_t seed;
  double step;

  explicit CheckContext(Scenario sc);
};

struct CheckInfo {
  std::string name;
  std::string module;
  std::string anchor;
  std::string description;
  double default_tolerance;
  bool needs_linear_feedback;
  /// Returns the worst defect and fills `csv`; status is decided by the caller
  /// unless the function sets `status` to fail itself.
  std::function<CheckOutcome(const CheckContext&, double tolerance)> run;
};

/// Static registry, in listing order.
const std::vector<CheckInfo>& check_registry();
const CheckInfo* find_check(const std::string& name);
std::string list_checks_text();

namespace exit_code {
inline constexpr int pass = 0;
inline constexpr int check_failure = 1;
inline constexpr int invalid = 2;
inline constexpr int divergence = 3;
}  // namespace exit_code

struct RunOptions {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> step;
  bool parallel = false;
};

struct RunReport {
  std::vector<CheckOutcome> outcomes;
  std::string output_dir;
  int exit_code = exit_code::pass;
};

/// Throws ConfigError for unknown checks or checks the system cannot run.
void validate_checks(const Scenario& scenario);

/// Runs every requested check, writes one CSV per check and summary.csv
/// into the output directory, and folds the statuses into an exit code.
RunReport run_scenario(Scenario scenario, const RunOptions& options);

}  // namespace setkoop
