#pragma once

#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "setkoop/control.hpp"
#include "setkoop/grid.hpp"
#include "setkoop/types.hpp"
#include "setkoop/vector_field.hpp"

namespace setkoop {

/// Complex-valued observable on R^d. Immutable; copies share structure.
///
/// Closed forms (bumps, linear windows, constants, and their sums, products
/// and scalar multiples) are evaluated exactly with analytic gradients.
/// Grid-sampled observables interpolate multilinearly inside their box and
/// use central differences for gradients. Pullbacks phi o Phi^u_(tau,t) are
/// evaluated by integrating the flow on demand, with gradients from the
/// flow's variational equation.
class Observable {
 public:
  enum class Kind { bump, linear_window, constant, grid_sampled, pullback, sum, product, scaled };

  /// b(x) = (1 - |x - c|^2 / r^2)^2 on |x - c| < r, zero elsewhere. C1.
  static Observable bump(Vector center, double radius);
  /// x -> sum_k coeffs_k x_k. Not compactly supported.
  static Observable linear_window(CVector coeffs);
  static Observable constant(int dim, Complex value);
  static Observable zero(int dim) { return constant(dim, 0.0); }
  /// Values at the grid nodes, in node order. `fd_step` <= 0 selects the
  /// grid spacing as the finite-difference step.
  static Observable grid_sampled(SpatialGrid grid, std::vector<Complex> values,
                                 double fd_step = 0.0);
  static Observable pullback(Observable base, VectorField field, ControlSignal signal, double tau,
                             double t, double step);

  friend Observable operator+(const Observable& a, const Observable& b);
  friend Observable operator-(const Observable& a, const Observable& b);
  friend Observable operator*(Complex c, const Observable& a);
  friend Observable product(const Observable& a, const Observable& b);

  Kind kind() const;
  int dim() const;

  Complex eval(const Vector& x) const;
  CVector gradient(const Vector& x) const;

  /// Values at every node of `grid`, in node order.
  std::vector<Complex> values_on(const SpatialGrid& grid) const;

  bool is_c1() const;
  /// False for window-restricted forms such as linear windows and constants.
  bool compact() const;
  /// Radius of a ball around support_center() containing the support;
  /// infinity for non-compact forms.
  double support_radius() const;
  Vector support_center() const;
  /// Grid-sampled forms (and anything built from them) are evaluable only
  /// inside their box.
  bool evaluable_at(const Vector& x) const;

  /// Present for grid-sampled forms.
  const SpatialGrid* grid() const;
  const std::vector<Complex>* grid_values() const;

  struct Node;

 private:
  explicit Observable(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Finite family of observables with labels naming the signal or control
/// that produced each member.
struct ObservableSet {
  std::vector<Observable> members;
  std::vector<std::string> labels;

  void add(Observable member, std::string label) {
    members.push_back(std::move(member));
    labels.push_back(std::move(label));
  }
  std::size_t size() const { return members.size(); }
  bool empty() const { return members.empty(); }
};

/// Maximum over grid nodes of |a(x) - b(x)|.
double sup_norm_diff(const Observable& a, const Observable& b, const SpatialGrid& grid);
double sup_norm(const Observable& a, const SpatialGrid& grid);
/// Maximum of |a_i - b_i| over two value vectors of equal length.
double sup_norm_diff(const std::vector<Complex>& a, const std::vector<Complex>& b);

/// Grid-sampled psi with psi(node) = obs(Phi^u_(tau,t)(node)).
Observable compose_with_flow(const Observable& obs, const VectorField& field,
                             const ControlSignal& signal, double tau, double t,
                             const SpatialGrid& grid, double step);

/// CSV with header node_0..node_{d-1},re,im, one row per grid node.
void write_observable_csv(std::ostream& out, const SpatialGrid& grid, const Observable& obs);

}  // namespace setkoop
