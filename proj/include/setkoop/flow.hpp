#pragma once

#include <iosfwd>
#include <vector>

#include "setkoop/control.hpp"
#include "setkoop/grid.hpp"
#include "setkoop/types.hpp"
#include "setkoop/vector_field.hpp"

namespace setkoop {

struct TrajectoryPoint {
  double time;
  Vector state;
};

struct FlowResult {
  double start_time = 0.0;
  double end_time = 0.0;
  Vector initial_state;
  Vector final_state;
  /// Largest step actually used after snapping to segment boundaries.
  double step = 0.0;
  std::vector<TrajectoryPoint> trajectory;
};

/// Flow map of x' = f(x, u(s)) from `tau` to `t` by classical fourth-order
/// Runge-Kutta. Each piece between control switches is split into equal
/// steps no longer than `step`; for t < tau the steps are negative.
FlowResult integrate_flow(const VectorField& field, const ControlSignal& signal, double tau,
                          double t, const Vector& x0, double step, bool record = false);

/// Same flow together with its spatial Jacobian, obtained by integrating the
/// variational equation alongside the state.
struct FlowWithJacobian {
  Vector state;
  Matrix jacobian;
};

FlowWithJacobian integrate_flow_jacobian(const VectorField& field, const ControlSignal& signal,
                                         double tau, double t, const Vector& x0, double step);

/// integrate_flow at every grid node, in node order.
std::vector<Vector> flow_on_grid(const VectorField& field, const ControlSignal& signal,
                                 double tau, double t, const SpatialGrid& grid, double step);

struct FlowEstimateReport {
  double max_norm_observed = 0.0;      // M_R
  double lipschitz_observed = 0.0;     // L_R
  double gronwall_bound = 0.0;         // (R + m T) e^{m T}
  bool growth_ok = false;              // all observations finite
  bool within_bound = false;           // max_norm_observed <= gronwall_bound
};

/// Empirical counterparts of the uniform bound and the joint Lipschitz
/// estimate of flows started in B(0, R). Time pairs tau <= t are sampled on a
/// uniform lattice of `time_samples` points in [0, T].
FlowEstimateReport check_flow_estimates(const VectorField& field,
                                        const std::vector<ControlSignal>& signals,
                                        const SpatialGrid& grid, double radius, double step,
                                        int time_samples = 5);

struct ContinuityRow {
  double control_distance;
  double flow_discrepancy;
};

/// Sup over grid nodes of |Phi^u - Phi^v| at (tau, t) for each perturbation v.
/// Distances to u may repeat but must never increase along the sequence.
std::vector<ContinuityRow> check_continuity_in_control(
    const VectorField& field, const ControlSignal& reference,
    const std::vector<ControlSignal>& perturbations, const SpatialGrid& grid, double tau, double t,
    double step);

/// Discrepancies never grow by more than `slack` from one row to the next.
bool discrepancies_non_increasing(const std::vector<ContinuityRow>& rows, double slack = 1.1);

/// CSV with header time,state_0..state_{d-1}.
void write_trajectory_csv(std::ostream& out, const FlowResult& flow);

}  // namespace setkoop
