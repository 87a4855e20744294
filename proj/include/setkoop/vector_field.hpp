#pragma once

#include <string>
#include <vector>

#include "setkoop/control.hpp"
#include "setkoop/types.hpp"

namespace setkoop {

class SpatialGrid;

/// Built-in state-only vector fields used as building blocks of
/// control-affine systems.
struct Primitive {
  enum class Kind { zero, constant, linear, sine, abs };

  Kind kind = Kind::zero;
  int dim = 1;
  Vector offset;  // constant
  Matrix gain;    // linear, sine, abs

  static Primitive zero(int dim);
  static Primitive constant(Vector c);
  /// x -> M x
  static Primitive linear(Matrix m);
  /// x -> M sin(x), componentwise sine
  static Primitive sine(Matrix m);
  /// x -> M |x|, componentwise absolute value. Lipschitz but not C1.
  static Primitive abs(Matrix m);

  Vector value(const Vector& x) const;
  Matrix jacobian(const Vector& x) const;
  /// g such that |p(x)| <= g (1 + |x|).
  double growth() const;
  double lipschitz() const;
  bool smooth() const { return kind != Kind::abs; }
  bool is_zero() const;
};

/// Analytic upper bounds on |f(x,u)| <= m (1 + |x|) and the Lipschitz
/// constant of f(., u), uniform over a control sample.
struct FieldBounds {
  double growth = 0.0;
  double lipschitz = 0.0;
};

/// Parametrised family of controlled vector fields f(x, u).
class VectorField {
 public:
  enum class Family { scalar_affine, linear_feedback, control_affine };

  /// x' = a x + u, with scalar state and control.
  static VectorField scalar_affine(double a);
  /// x' = (A + B K) x where the control coordinates hold K row-major.
  static VectorField linear_feedback(Matrix a, Matrix b);
  /// x' = f0(x) + sum_k u_k f_k(x).
  static VectorField control_affine(Primitive drift, std::vector<Primitive> inputs);
  /// Identically zero field with the given dimensions.
  static VectorField zero(int state_dim, int control_dim);

  Family family() const { return family_; }
  std::string family_name() const;
  int state_dim() const { return state_dim_; }
  int control_dim() const { return control_dim_; }

  Vector evaluate(const Vector& x, const Vector& u) const;
  Matrix jacobian(const Vector& x, const Vector& u) const;

  /// The control-dependent field is continuously differentiable in x.
  bool is_c1() const;
  bool is_zero() const;

  FieldBounds bounds(const ControlSampleSet& controls) const;

  /// For linear_feedback fields: the closed-loop matrix A + B K(u).
  Matrix closed_loop(const Vector& u) const;
  /// For linear_feedback fields: reshape control coordinates into K.
  Matrix feedback_matrix(const Vector& u) const;

  double scalar_gain() const { return a_; }
  const Matrix& state_matrix() const { return state_matrix_; }
  const Matrix& input_matrix() const { return input_matrix_; }
  const Primitive& drift() const { return drift_; }
  const std::vector<Primitive>& inputs() const { return inputs_; }

 private:
  Family family_ = Family::control_affine;
  int state_dim_ = 1;
  int control_dim_ = 1;
  double a_ = 0.0;
  Matrix state_matrix_;
  Matrix input_matrix_;
  Primitive drift_;
  std::vector<Primitive> inputs_;
};

/// Control sample whose points are the row-major flattenings of feedback gains.
ControlSampleSet feedback_controls(const std::vector<Matrix>& gains);

/// Sampled verification of the growth and Lipschitz hypotheses on a window.
struct HypothesisReport {
  double growth_observed = 0.0;
  double lipschitz_observed = 0.0;
  FieldBounds declared;
  bool ok = false;
};

HypothesisReport verify_hypotheses(const VectorField& field, const ControlSampleSet& controls,
                                   const SpatialGrid& window);

}  // namespace setkoop
