#include "setkoop/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace setkoop {

namespace {

void require_keys(const YAML::Node& node, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& where) {
  if (!node.IsScalar()) throw ConfigError(where + " must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where + " has an invalid value '" + node.Scalar() + "'");
  }
}

template <typename T>
void optional_scalar(const YAML::Node& parent, const char* key, const std::string& where, T& out) {
  if (const auto node = parent[key]) out = scalar<T>(node, where + "." + key);
}

Vector vector_of(const YAML::Node& node, const std::string& where) {
  if (node.IsScalar()) return Vector::Constant(1, scalar<double>(node, where));
  if (!node.IsSequence() || node.size() == 0) throw ConfigError(where + " must be a non-empty list");
  Vector out(node.size());
  for (std::size_t i = 0; i < node.size(); ++i)
    out(i) = scalar<double>(node[i], where + "[" + std::to_string(i) + "]");
  return out;
}

Matrix matrix_of(const YAML::Node& node, const std::string& where) {
  if (!node.IsSequence() || node.size() == 0) throw ConfigError(where + " must be a list of rows");
  std::vector<Vector> rows;
  for (std::size_t i = 0; i < node.size(); ++i)
    rows.push_back(vector_of(node[i], where + "[" + std::to_string(i) + "]"));
  Matrix out(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != out.cols()) throw ConfigError(where + " has ragged rows");
    out.row(i) = rows[i].transpose();
  }
  return out;
}

/// A scalar is broadcast to every axis.
Vector box_corner(const YAML::Node& node, const std::string& where, int dim) {
  if (node.IsScalar()) return Vector::Constant(dim, scalar<double>(node, where));
  Vector v = vector_of(node, where);
  if (v.size() != dim) throw ConfigError(where + " must have " + std::to_string(dim) + " entries");
  return v;
}

PrimitiveSpec primitive_of(const YAML::Node& node, const std::string& where) {
  require_keys(node, where, {"kind", "matrix", "offset"});
  PrimitiveSpec p;
  if (!node["kind"]) throw ConfigError(where + ".kind is required");
  p.kind = scalar<std::string>(node["kind"], where + ".kind");
  if (p.kind == "constant") {
    if (!node["offset"]) throw ConfigError(where + ".offset is required for constant primitives");
    p.offset = vector_of(node["offset"], where + ".offset");
  } else if (p.kind == "linear" || p.kind == "sine" || p.kind == "abs") {
    if (!node["matrix"]) throw ConfigError(where + ".matrix is required for " + p.kind);
    p.matrix = matrix_of(node["matrix"], where + ".matrix");
    if (p.matrix.rows() != p.matrix.cols()) throw ConfigError(where + ".matrix must be square");
  } else if (p.kind != "zero") {
    throw ConfigError(where + ".kind '" + p.kind + "' is not a primitive");
  }
  return p;
}

int primitive_dim(const PrimitiveSpec& p) {
  if (p.kind == "constant") return static_cast<int>(p.offset.size());
  if (p.kind == "zero") return -1;
  return static_cast<int>(p.matrix.rows());
}

Primitive build_primitive(const PrimitiveSpec& p, int dim) {
  if (p.kind == "constant") return Primitive::constant(p.offset);
  if (p.kind == "linear") return Primitive::linear(p.matrix);
  if (p.kind == "sine") return Primitive::sine(p.matrix);
  if (p.kind == "abs") return Primitive::abs(p.matrix);
  return Primitive::zero(dim);
}

void parse_system(const YAML::Node& node, Scenario& sc) {
  require_keys(node, "system", {"family", "a", "A", "B", "drift", "inputs", "state_dim", "control_dim"});
  if (!node["family"]) throw ConfigError("system.family is required");
  sc.family = scalar<std::string>(node["family"], "system.family");
  if (sc.family == "scalar_affine") {
    if (!node["a"]) throw ConfigError("system.a is required for scalar_affine");
    sc.a = scalar<double>(node["a"], "system.a");
    sc.state_dim = sc.control_dim = 1;
  } else if (sc.family == "linear_feedback") {
    if (!node["A"] || !node["B"]) throw ConfigError("system.A and system.B are required for linear_feedback");
    sc.state_matrix = matrix_of(node["A"], "system.A");
    sc.input_matrix = matrix_of(node["B"], "system.B");
    if (sc.state_matrix.rows() != sc.state_matrix.cols()) throw ConfigError("system.A must be square");
    if (sc.input_matrix.rows() != sc.state_matrix.rows())
      throw ConfigError("system.B must have as many rows as system.A");
    sc.state_dim = static_cast<int>(sc.state_matrix.rows());
    sc.control_dim = static_cast<int>(sc.input_matrix.cols() * sc.state_matrix.cols());
  } else if (sc.family == "control_affine") {
    if (!node["drift"] || !node["inputs"]) throw ConfigError("system.drift and system.inputs are required for control_affine");
    sc.drift = primitive_of(node["drift"], "system.drift");
    if (!node["inputs"].IsSequence() || node["inputs"].size() == 0)
      throw ConfigError("system.inputs must be a non-empty list");
    for (std::size_t i = 0; i < node["inputs"].size(); ++i)
      sc.inputs.push_back(primitive_of(node["inputs"][i], "system.inputs[" + std::to_string(i) + "]"));
    int dim = primitive_dim(sc.drift);
    for (const auto& p : sc.inputs) {
      const int d = primitive_dim(p);
      if (d < 0) continue;
      if (dim >= 0 && d != dim) throw ConfigError("system primitives have mismatched dimensions");
      dim = d;
    }
    if (dim < 0) {
      if (!node["state_dim"]) throw ConfigError("system.state_dim is required when every primitive is zero");
      dim = scalar<int>(node["state_dim"], "system.state_dim");
    }
    sc.state_dim = dim;
    sc.control_dim = static_cast<int>(sc.inputs.size());
  } else if (sc.family == "zero") {
    optional_scalar(node, "state_dim", "system", sc.state_dim);
    optional_scalar(node, "control_dim", "system", sc.control_dim);
    if (sc.state_dim < 1 || sc.control_dim < 1) throw ConfigError("system dimensions must be positive");
  } else {
    throw ConfigError("system.family '" + sc.family + "' is not supported");
  }
}

void parse_controls(const YAML::Node& node, Scenario& sc) {
  require_keys(node, "controls", {"points", "feedbacks", "segments", "random_signals", "seed"});
  if (sc.family == "linear_feedback") {
    if (node["points"]) throw ConfigError("linear_feedback controls are given as controls.feedbacks");
    if (!node["feedbacks"] || !node["feedbacks"].IsSequence() || node["feedbacks"].size() == 0)
      throw ConfigError("controls.feedbacks must be a non-empty list of matrices");
    for (std::size_t i = 0; i < node["feedbacks"].size(); ++i) {
      Matrix k = matrix_of(node["feedbacks"][i], "controls.feedbacks[" + std::to_string(i) + "]");
      if (k.rows() != sc.input_matrix.cols() || k.cols() != sc.state_matrix.cols())
        throw ConfigError("controls.feedbacks[" + std::to_string(i) + "] has the wrong shape");
      sc.feedbacks.push_back(std::move(k));
    }
  } else {
    if (node["feedbacks"]) throw ConfigError("controls.feedbacks is only valid for linear_feedback");
    if (!node["points"] || !node["points"].IsSequence() || node["points"].size() == 0)
      throw ConfigError("controls.points must be a non-empty list");
    for (std::size_t i = 0; i < node["points"].size(); ++i) {
      Vector p = vector_of(node["points"][i], "controls.points[" + std::to_string(i) + "]");
      if (p.size() != sc.control_dim)
        throw ConfigError("controls.points[" + std::to_string(i) + "] must have " +
                          std::to_string(sc.control_dim) + " coordinates");
      sc.control_points.push_back(std::move(p));
    }
  }
  optional_scalar(node, "segments", "controls", sc.segments);
  optional_scalar(node, "random_signals", "controls", sc.random_signals);
  optional_scalar(node, "seed", "controls", sc.seed);
  if (sc.segments < 1) throw ConfigError("controls.segments must be positive");
  if (sc.random_signals < 0) throw ConfigError("controls.random_signals must be non-negative");
}

void parse_checks(const YAML::Node& node, Scenario& sc) {
  if (!node.IsSequence() || node.size() == 0) throw ConfigError("checks must be a non-empty list");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string where = "checks[" + std::to_string(i) + "]";
    CheckRequest req;
    if (node[i].IsScalar()) {
      req.name = scalar<std::string>(node[i], where);
    } else {
      require_keys(node[i], where, {"name", "tolerance"});
      if (!node[i]["name"]) throw ConfigError(where + ".name is required");
      req.name = scalar<std::string>(node[i]["name"], where + ".name");
      if (node[i]["tolerance"]) {
        req.tolerance = scalar<double>(node[i]["tolerance"], where + ".tolerance");
        if (!(*req.tolerance >= 0.0) || !std::isfinite(*req.tolerance))
          throw ConfigError(where + ".tolerance must be finite and non-negative");
      }
    }
    if (!seen.insert(req.name).second) throw ConfigError("check '" + req.name + "' is listed twice");
    sc.checks.push_back(std::move(req));
  }
}

void validate(Scenario& sc) {
  if (sc.points_per_axis < 2) throw ConfigError("grid.points_per_axis must be at least 2");
  for (int k = 0; k < sc.state_dim; ++k)
    if (!(sc.lower(k) < sc.upper(k))) throw ConfigError("grid.lower must be below grid.upper");
  if (!(sc.radius > 0.0)) throw ConfigError("observable.radius must be positive");
  if (!(sc.step > 0.0)) throw ConfigError("time.step must be positive");
  if (!(sc.tau >= 0.0 && sc.tau <= sc.s && sc.s <= sc.t && sc.t <= sc.horizon))
    throw ConfigError("time must satisfy 0 <= tau <= s <= t <= horizon");
  if (!(sc.tau < sc.t)) throw ConfigError("time.tau must be below time.t");
  if (!(sc.h0 > 0.0) || !(sc.factor > 0.0 && sc.factor < 1.0) || sc.count < 1)
    throw ConfigError("the h sequence needs h0 > 0, 0 < factor < 1 and count >= 1");
  if (sc.tau + sc.h0 > sc.horizon) throw ConfigError("tau + h0 exceeds the horizon");
  if (!(sc.dtau > 0.0) || sc.dtau > (sc.t - sc.tau) / 2.0)
    throw ConfigError("time.dtau must be positive and leave interior samples");
  if (sc.lipschitz_pairs < 1 || sc.duality_trials < 1 || sc.adjoint_trials < 1)
    throw ConfigError("sample counts must be positive");
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML parse error: ") + e.what());
  }
  if (!root || root.IsNull()) throw ConfigError("scenario is empty");
  require_keys(root, "scenario",
               {"system", "controls", "grid", "observable", "time", "samples", "checks", "output_dir"});
  for (const char* key : {"system", "controls", "grid", "checks"})
    if (!root[key]) throw ConfigError(std::string("section '") + key + "' is required");

  Scenario sc;
  parse_system(root["system"], sc);
  parse_controls(root["controls"], sc);

  const auto grid = root["grid"];
  require_keys(grid, "grid", {"lower", "upper", "points_per_axis"});
  if (!grid["lower"] || !grid["upper"]) throw ConfigError("grid.lower and grid.upper are required");
  sc.lower = box_corner(grid["lower"], "grid.lower", sc.state_dim);
  sc.upper = box_corner(grid["upper"], "grid.upper", sc.state_dim);
  optional_scalar(grid, "points_per_axis", "grid", sc.points_per_axis);

  sc.center = Vector::Zero(sc.state_dim);
  if (const auto obs = root["observable"]) {
    require_keys(obs, "observable", {"center", "radius"});
    if (obs["center"]) sc.center = box_corner(obs["center"], "observable.center", sc.state_dim);
    optional_scalar(obs, "radius", "observable", sc.radius);
  }

  bool horizon_given = false;
  bool s_given = false;
  if (const auto time = root["time"]) {
    require_keys(time, "time", {"tau", "s", "t", "horizon", "step", "h0", "factor", "count", "dtau"});
    optional_scalar(time, "tau", "time", sc.tau);
    optional_scalar(time, "t", "time", sc.t);
    s_given = static_cast<bool>(time["s"]);
    optional_scalar(time, "s", "time", sc.s);
    horizon_given = static_cast<bool>(time["horizon"]);
    optional_scalar(time, "horizon", "time", sc.horizon);
    optional_scalar(time, "step", "time", sc.step);
    optional_scalar(time, "h0", "time", sc.h0);
    optional_scalar(time, "factor", "time", sc.factor);
    optional_scalar(time, "count", "time", sc.count);
    optional_scalar(time, "dtau", "time", sc.dtau);
  }
  if (!horizon_given) sc.horizon = sc.t;
  if (!s_given) sc.s = 0.5 * (sc.tau + sc.t);

  if (const auto samples = root["samples"]) {
    require_keys(samples, "samples", {"lipschitz_pairs", "duality_trials", "adjoint_trials"});
    optional_scalar(samples, "lipschitz_pairs", "samples", sc.lipschitz_pairs);
    optional_scalar(samples, "duality_trials", "samples", sc.duality_trials);
    optional_scalar(samples, "adjoint_trials", "samples", sc.adjoint_trials);
  }

  parse_checks(root["checks"], sc);
  if (const auto out = root["output_dir"]) sc.output_dir = scalar<std::string>(out, "output_dir");
  validate(sc);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

VectorField Scenario::field() const {
  if (family == "scalar_affine") return VectorField::scalar_affine(a);
  if (family == "linear_feedback") return VectorField::linear_feedback(state_matrix, input_matrix);
  if (family == "zero") return VectorField::zero(state_dim, control_dim);
  std::vector<Primitive> in;
  for (const auto& p : inputs) in.push_back(build_primitive(p, state_dim));
  return VectorField::control_affine(build_primitive(drift, state_dim), std::move(in));
}

ControlSamplePtr Scenario::controls() const {
  if (family == "linear_feedback") return std::make_shared<const ControlSampleSet>(feedback_controls(feedbacks));
  return std::make_shared<const ControlSampleSet>(control_points);
}

SpatialGrid Scenario::grid() const { return SpatialGrid(lower, upper, points_per_axis); }

Observable Scenario::observable() const { return Observable::bump(center, radius); }

std::vector<double> Scenario::h_values() const {
  std::vector<double> h;
  double value = h0;
  for (int k = 0; k < count; ++k, value *= factor) h.push_back(value);
  return h;
}

}  // namespace setkoop
