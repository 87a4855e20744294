#pragma once

#include <string>
#include <vector>

#include "setkoop/control.hpp"
#include "setkoop/grid.hpp"
#include "setkoop/observable.hpp"
#include "setkoop/set_ops.hpp"
#include "setkoop/vector_field.hpp"

namespace setkoop {

/// {phi o Phi^u_(tau,t) : u in signals} as grid samples, labelled by signal.
ObservableSet koopman_set(const Observable& phi, const VectorField& field,
                          const std::vector<ControlSignal>& signals, double tau, double t,
                          const SpatialGrid& grid, double step);

/// Adds to `signals` every splice "u on [0, s), v on [s, T]" that is not
/// already present (a.e.) on [0, T].
std::vector<ControlSignal> splice_closure(const std::vector<ControlSignal>& signals, double s);

enum class CompositionMode {
  /// Inner observables are kept as exact pullbacks; no interpolation.
  exact,
  /// Inner observables are grid samples evaluated by interpolation.
  grid,
};

/// Hausdorff report between the sampled Koopman set on [tau, t] and the
/// memberwise composition of the two sampled factors split at s. The family
/// must be closed under splicing at s on [tau, t].
///
/// A composed member pairs v on [s, t] with u on [tau, s] and equals
/// phi o Phi^v_(s,t) o Phi^u_(tau,s), which is the member of the splice of u
/// and v.
InclusionReport check_semigroup(const Observable& phi, const VectorField& field,
                                const std::vector<ControlSignal>& signals, double tau, double s,
                                double t, const SpatialGrid& grid, double step,
                                CompositionMode mode = CompositionMode::exact);

/// Tolerance for check_semigroup: integrator error plus interpolation slack.
double semigroup_tolerance(double step, double tau, double t, double grid_slack = 0.0);

/// Hausdorff distance between K(alpha phi) and alpha K(phi).
double check_homogeneity(const Observable& phi, double alpha, const VectorField& field,
                         const std::vector<ControlSignal>& signals, double tau, double t,
                         const SpatialGrid& grid, double step);

/// Forward defect of K(phi1 + phi2) into the Minkowski sum K(phi1) + K(phi2).
double check_subadditivity(const Observable& phi1, const Observable& phi2,
                           const VectorField& field, const std::vector<ControlSignal>& signals,
                           double tau, double t, const SpatialGrid& grid, double step);

struct LipschitzReport {
  double lhs = 0.0;  // forward defect of K(phi1) into K(phi2)
  double rhs = 0.0;  // sup |phi1 - phi2| over the flowed window
  bool ok = false;
};

LipschitzReport check_lipschitz_in_observable(const Observable& phi1, const Observable& phi2,
                                              const VectorField& field,
                                              const std::vector<ControlSignal>& signals,
                                              double tau, double t, const SpatialGrid& grid,
                                              double step);

struct ScheduleEntry {
  double start;
  double end;
  ControlSignal signal;
};

struct CurvePoint {
  double time;
  Observable value;
  std::string label;  // name of the signal realising this point
};

/// psi_(tau,t) = phi o Phi^{u_t}_(tau,t) where u_t is the signal scheduled
/// for the interval containing t. The schedule must cover [tau, max(times)]
/// without gaps.
std::vector<CurvePoint> build_observable_curve(const Observable& phi, const VectorField& field,
                                               double tau, const std::vector<double>& times,
                                               const std::vector<ScheduleEntry>& schedule,
                                               const SpatialGrid& grid, double step);

}  // namespace setkoop
