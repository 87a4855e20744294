#include "setkoop/vector_field.hpp"

#include <algorithm>
#include <cmath>

#include "setkoop/errors.hpp"
#include "setkoop/grid.hpp"

namespace setkoop {

namespace {

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw InvalidArgument(std::string(what) + " must be a nonempty square matrix");
}

}  // namespace

Primitive Primitive::zero(int dim) {
  Primitive p;
  p.kind = Kind::zero;
  p.dim = dim;
  return p;
}

Primitive Primitive::constant(Vector c) {
  Primitive p;
  p.kind = Kind::constant;
  p.dim = static_cast<int>(c.size());
  p.offset = std::move(c);
  return p;
}

Primitive Primitive::linear(Matrix m) {
  require_square(m, "linear primitive gain");
  Primitive p;
  p.kind = Kind::linear;
  p.dim = static_cast<int>(m.rows());
  p.gain = std::move(m);
  return p;
}

Primitive Primitive::sine(Matrix m) {
  Primitive p = linear(std::move(m));
  p.kind = Kind::sine;
  return p;
}

Primitive Primitive::abs(Matrix m) {
  Primitive p = linear(std::move(m));
  p.kind = Kind::abs;
  return p;
}

Vector Primitive::value(const Vector& x) const {
  switch (kind) {
    case Kind::zero:
      return Vector::Zero(dim);
    case Kind::constant:
      return offset;
    case Kind::linear:
      return gain * x;
    case Kind::sine:
      return gain * x.array().sin().matrix();
    case Kind::abs:
      return gain * x.array().abs().matrix();
  }
  return Vector::Zero(dim);
}

Matrix Primitive::jacobian(const Vector& x) const {
  switch (kind) {
    case Kind::zero:
    case Kind::constant:
      return Matrix::Zero(dim, dim);
    case Kind::linear:
      return gain;
    case Kind::sine:
      return gain * x.array().cos().matrix().asDiagonal();
    case Kind::abs: {
      Vector sign = x.unaryExpr([](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
      return gain * sign.asDiagonal();
    }
  }
  return Matrix::Zero(dim, dim);
}

double Primitive::growth() const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::constant:
      return offset.norm();
    default:
      return spectral_norm(gain);
  }
}

double Primitive::lipschitz() const {
  return kind == Kind::zero || kind == Kind::constant ? 0.0 : spectral_norm(gain);
}

bool Primitive::is_zero() const {
  switch (kind) {
    case Kind::zero:
      return true;
    case Kind::constant:
      return offset.isZero(0.0);
    default:
      return gain.isZero(0.0);
  }
}

VectorField VectorField::scalar_affine(double a) {
  if (!std::isfinite(a)) throw InvalidArgument("scalar_affine gain must be finite");
  VectorField f;
  f.family_ = Family::scalar_affine;
  f.state_dim_ = 1;
  f.control_dim_ = 1;
  f.a_ = a;
  return f;
}

VectorField VectorField::linear_feedback(Matrix a, Matrix b) {
  require_square(a, "state matrix A");
  if (b.rows() != a.rows() || b.cols() == 0)
    throw InvalidArgument("input matrix B must have as many rows as A");
  VectorField f;
  f.family_ = Family::linear_feedback;
  f.state_dim_ = static_cast<int>(a.rows());
  f.control_dim_ = static_cast<int>(b.cols() * a.rows());
  f.state_matrix_ = std::move(a);
  f.input_matrix_ = std::move(b);
  return f;
}

VectorField VectorField::control_affine(Primitive drift, std::vector<Primitive> inputs) {
  if (inputs.empty()) throw InvalidArgument("control_affine needs at least one input field");
  for (const auto& p : inputs)
    if (p.dim != drift.dim) throw InvalidArgument("control_affine primitives have mixed dimensions");
  VectorField f;
  f.family_ = Family::control_affine;
  f.state_dim_ = drift.dim;
  f.control_dim_ = static_cast<int>(inputs.size());
  f.drift_ = std::move(drift);
  f.inputs_ = std::move(inputs);
  return f;
}

VectorField VectorField::zero(int state_dim, int control_dim) {
  return control_affine(Primitive::zero(state_dim),
                        std::vector<Primitive>(control_dim, Primitive::zero(state_dim)));
}

std::string VectorField::family_name() const {
  switch (family_) {
    case Family::scalar_affine:
      return "scalar_affine";
    case Family::linear_feedback:
      return "linear_feedback";
    case Family::control_affine:
      return "control_affine";
  }
  return "unknown";
}

Matrix VectorField::feedback_matrix(const Vector& u) const {
  if (family_ != Family::linear_feedback) throw InvalidArgument("not a linear_feedback field");
  if (u.size() != control_dim_) throw InvalidArgument("feedback coordinates have wrong size");
  const auto m = input_matrix_.cols();
  Matrix k(m, state_dim_);
  for (Eigen::Index i = 0; i < m; ++i)
    for (int j = 0; j < state_dim_; ++j) k(i, j) = u(i * state_dim_ + j);
  return k;
}

Matrix VectorField::closed_loop(const Vector& u) const {
  return state_matrix_ + input_matrix_ * feedback_matrix(u);
}

Vector VectorField::evaluate(const Vector& x, const Vector& u) const {
  switch (family_) {
    case Family::scalar_affine:
      return Vector::Constant(1, a_ * x(0) + u(0));
    case Family::linear_feedback:
      return closed_loop(u) * x;
    case Family::control_affine: {
      Vector out = drift_.value(x);
      for (std::size_t k = 0; k < inputs_.size(); ++k)
        if (u(k) != 0.0) out += u(k) * inputs_[k].value(x);
      return out;
    }
  }
  return Vector::Zero(state_dim_);
}

Matrix VectorField::jacobian(const Vector& x, const Vector& u) const {
  switch (family_) {
    case Family::scalar_affine:
      return Matrix::Constant(1, 1, a_);
    case Family::linear_feedback:
      return closed_loop(u);
    case Family::control_affine: {
      Matrix out = drift_.jacobian(x);
      for (std::size_t k = 0; k < inputs_.size(); ++k)
        if (u(k) != 0.0) out += u(k) * inputs_[k].jacobian(x);
      return out;
    }
  }
  return Matrix::Zero(state_dim_, state_dim_);
}

bool VectorField::is_c1() const {
  if (family_ != Family::control_affine) return true;
  if (!drift_.smooth()) return false;
  return std::all_of(inputs_.begin(), inputs_.end(), [](const Primitive& p) { return p.smooth(); });
}

bool VectorField::is_zero() const {
  switch (family_) {
    case Family::scalar_affine:
      return false;
    case Family::linear_feedback:
      return state_matrix_.isZero(0.0) && input_matrix_.isZero(0.0);
    case Family::control_affine:
      return drift_.is_zero() && std::all_of(inputs_.begin(), inputs_.end(),
                                              [](const Primitive& p) { return p.is_zero(); });
  }
  return false;
}

FieldBounds VectorField::bounds(const ControlSampleSet& controls) const {
  if (controls.dim() != control_dim_) throw InvalidArgument("control dimension mismatch");
  FieldBounds b;
  for (const auto& p : controls.points()) {
    switch (family_) {
      case Family::scalar_affine:
        b.growth = std::max({b.growth, std::abs(a_), std::abs(p.coords(0))});
        b.lipschitz = std::abs(a_);
        break;
      case Family::linear_feedback: {
        const double n = spectral_norm(closed_loop(p.coords));
        b.growth = std::max(b.growth, n);
        b.lipschitz = std::max(b.lipschitz, n);
        break;
      }
      case Family::control_affine: {
        double g = drift_.growth();
        double l = drift_.lipschitz();
        for (std::size_t k = 0; k < inputs_.size(); ++k) {
          g += std::abs(p.coords(k)) * inputs_[k].growth();
          l += std::abs(p.coords(k)) * inputs_[k].lipschitz();
        }
        b.growth = std::max(b.growth, g);
        b.lipschitz = std::max(b.lipschitz, l);
        break;
      }
    }
  }
  return b;
}

ControlSampleSet feedback_controls(const std::vector<Matrix>& gains) {
  std::vector<Vector> coords;
  for (const auto& k : gains) {
    Vector flat(k.size());
    for (Eigen::Index i = 0; i < k.rows(); ++i)
      for (Eigen::Index j = 0; j < k.cols(); ++j) flat(i * k.cols() + j) = k(i, j);
    coords.push_back(std::move(flat));
  }
  return ControlSampleSet(std::move(coords));
}

HypothesisReport verify_hypotheses(const VectorField& field, const ControlSampleSet& controls,
                                   const SpatialGrid& window) {
  HypothesisReport report;
  report.declared = field.bounds(controls);
  const auto nodes = window.nodes();
  for (const auto& p : controls.points()) {
    std::vector<Vector> values;
    values.reserve(nodes.size());
    for (const auto& x : nodes) {
      values.push_back(field.evaluate(x, p.coords));
      report.growth_observed =
          std::max(report.growth_observed, values.back().norm() / (1.0 + x.norm()));
    }
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t j = i + 1; j < nodes.size(); ++j) {
        const double dx = (nodes[i] - nodes[j]).norm();
        if (dx > 0)
          report.lipschitz_observed =
              std::max(report.lipschitz_observed, (values[i] - values[j]).norm() / dx);
      }
  }
  constexpr double slack = 1.0 + 1e-9;
  report.ok = std::isfinite(report.growth_observed) && std::isfinite(report.lipschitz_observed) &&
              report.growth_observed <= report.declared.growth * slack + 1e-12 &&
              report.lipschitz_observed <= report.declared.lipschitz * slack + 1e-12;
  return report;
}

}  // namespace setkoop
