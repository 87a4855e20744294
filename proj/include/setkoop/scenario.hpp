#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "setkoop/control.hpp"
#include "setkoop/errors.hpp"
#include "setkoop/grid.hpp"
#include "setkoop/observable.hpp"
#include "setkoop/vector_field.hpp"

namespace setkoop {

/// Malformed or inconsistent scenario file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct CheckRequest {
  std::string name;
  std::optional<double> tolerance;
};

struct PrimitiveSpec {
  std::string kind = "zero";  // zero, constant, linear, sine, abs
  Vector offset;
  Matrix matrix;
};

/// Declarative description of one run. See README.md for the file format.
struct Scenario {
  // system
  std::string family;
  double a = 0.0;
  Matrix state_matrix;
  Matrix input_matrix;
  PrimitiveSpec drift;
  std::vector<PrimitiveSpec> inputs;
  int state_dim = 1;
  int control_dim = 1;

  // controls
  std::vector<Vector> control_points;
  std::vector<Matrix> feedbacks;
  int segments = 1;
  int random_signals = 0;
  std::uint64_t seed = 0;

  // grid
  Vector lower;
  Vector upper;
  int points_per_axis = 21;

  // observable
  Vector center;
  double radius = 1.0;

  // time
  double tau = 0.0;
  double s = 0.5;
  double t = 1.0;
  double horizon = 1.0;
  double step = 1e-3;
  double h0 = 0.1;
  double factor = 0.5;
  int count = 6;
  double dtau = 1e-2;

  // samples
  int lipschitz_pairs = 100;
  int duality_trials = 100;
  int adjoint_trials = 50;

  std::vector<CheckRequest> checks;
  std::string output_dir = "output";

  VectorField field() const;
  ControlSamplePtr controls() const;
  SpatialGrid grid() const;
  Observable observable() const;
  std::vector<double> h_values() const;
};

/// Parses and validates YAML text. Unknown keys are errors.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

}  // namespace setkoop
