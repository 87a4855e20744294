#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "setkoop/control.hpp"
#include "setkoop/grid.hpp"
#include "setkoop/observable.hpp"
#include "setkoop/set_ops.hpp"
#include "setkoop/vector_field.hpp"

namespace setkoop {

/// {x -> grad phi(x) . f_u(x) : u in controls}, sampled on the grid and
/// labelled by control id.
ObservableSet liouville_set(const Observable& phi, const VectorField& field,
                            const ControlSampleSet& controls, const SpatialGrid& grid);

struct GeneratorOptions {
  /// Horizon T of the constant signals; every tau + h must lie in [0, T].
  double horizon = 1.0;
  /// Also sample fast-switching signals whose time averages are convex
  /// combinations of the controls. Their difference quotients approach the
  /// convexified Liouville set only.
  bool chattering_probes = false;
  std::size_t probe_count = 4;
  int probe_resolution = 4;   // weights are multiples of 1 / probe_resolution
  int probe_periods = 2;      // switching periods inside [tau, tau + h]
  /// Random convex combinations added to the convexified target.
  std::size_t convex_samples = 16;
  std::uint64_t seed = 0;
};

struct GeneratorRow {
  double h;
  double backward_defect;             // L(phi) into the difference quotients
  double forward_defect;              // difference quotients into L(phi)
  double forward_defect_convexified;  // difference quotients into co L(phi)
};

struct GeneratorStudy {
  std::vector<GeneratorRow> rows;
  double backward_rate;
  double forward_rate;
  double forward_convexified_rate;

  std::vector<double> h_values() const;
  std::vector<double> backward() const;
  std::vector<double> forward() const;
  std::vector<double> forward_convexified() const;
};

/// Difference quotients (K_(tau,tau+h)(phi) - phi) / h over the constant
/// signals of `controls` (plus chattering probes when enabled), compared with
/// the Liouville set for each h.
GeneratorStudy generator_study(const Observable& phi, const VectorField& field,
                               const ControlSamplePtr& controls, double tau,
                               const std::vector<double>& h_values, const SpatialGrid& grid,
                               double step, const GeneratorOptions& options = {});

/// Signal that cycles through the controls with the given time fractions,
/// `periods` times inside every window of length h aligned with the origin.
ControlSignal chattering_signal(const ControlSamplePtr& controls, const std::vector<double>& weights,
                                int resolution, int periods, double h, double horizon);

/// psi_(tau, t_final) = phi o Phi^u_(tau, t_final) for each tau, by
/// characteristics. Members are exact pullbacks.
std::vector<Observable> transport_solve(const Observable& phi, const VectorField& field,
                                        const ControlSignal& signal, double t_final,
                                        const std::vector<double>& tau_grid, double step);

struct TimedObservable {
  double tau;
  Observable value;
};

struct ResidualRow {
  double tau;
  double residual;  // min over u of sup |d_tau psi + grad psi . f_u|
  int control_id;   // minimising control
  std::vector<double> per_control;  // residual of each control, in id order
};

/// Residual of the Koopman differential inclusion along a curve sampled on a
/// uniform tau grid, with central differences in tau. Endpoints excluded.
std::vector<ResidualRow> inclusion_residual(const std::vector<TimedObservable>& curve,
                                            const VectorField& field,
                                            const ControlSampleSet& controls,
                                            const SpatialGrid& grid);

/// CSV with header h,backward_defect,forward_defect,forward_defect_convexified,fitted_rate.
void write_generator_csv(std::ostream& out, const GeneratorStudy& study);

}  // namespace setkoop
