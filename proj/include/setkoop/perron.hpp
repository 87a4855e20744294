#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "setkoop/control.hpp"
#include "setkoop/observable.hpp"
#include "setkoop/vector_field.hpp"

namespace setkoop {

struct Particle {
  Vector position;
  Complex weight;
};

/// Finite complex-weighted sum of Dirac masses.
struct ParticleMeasure {
  std::vector<Particle> particles;

  static ParticleMeasure dirac(Vector position, Complex weight = 1.0);
  double total_variation() const;
  bool empty() const { return particles.empty(); }
};

/// Finite family of C1 probes standing in for the weak-* topology.
struct TestBank {
  std::vector<Observable> functions;
};

/// <mu, phi> = sum_i w_i phi(x_i).
Complex pairing(const ParticleMeasure& mu, const Observable& phi);

/// Image measure under Phi^u_(tau,t): particles move, weights are kept.
ParticleMeasure pushforward(const ParticleMeasure& mu, const VectorField& field,
                            const ControlSignal& signal, double tau, double t, double step);

/// |<Phi#mu, phi> - <mu, phi o Phi>|, both sides sharing the same flow
/// evaluations at the particle positions.
double check_duality(const ParticleMeasure& mu, const Observable& phi, const VectorField& field,
                     const ControlSignal& signal, double tau, double t, double step);

/// <-div(f_u mu), zeta> = sum_i w_i grad zeta(x_i) . f_u(x_i).
Complex divergence_pairing(const ParticleMeasure& mu, const VectorField& field,
                           const ControlPoint& u, const Observable& zeta);

struct PerronGeneratorRow {
  double h;
  int control_id;
  double residual;  // max over the bank of |<(P mu - mu)/h, zeta> - <-div(f_u mu), zeta>|
};

std::vector<PerronGeneratorRow> perron_generator_study(const ParticleMeasure& mu,
                                                       const VectorField& field,
                                                       const ControlSamplePtr& controls,
                                                       double tau,
                                                       const std::vector<double>& h_values,
                                                       const TestBank& bank, double step,
                                                       double horizon = 1.0);

/// Residuals of one control across the study, in h order.
std::vector<double> residuals_for_control(const std::vector<PerronGeneratorRow>& rows, int control_id);

struct AdjointReport {
  /// min over sampled nu, probes phi of  max_psi Re<mu, psi> - Re<nu, phi>.
  double worst_margin = 0.0;
  /// Largest |Re<P^u mu, phi> - Re<mu, phi o Phi^u>| over matched signals.
  double matched_gap = 0.0;
  std::size_t comparisons = 0;
};

/// Checks Re<nu, phi> <= max over psi in K(phi) of Re<mu, psi> for nu in the
/// sampled Perron set and `convex_samples` random convex combinations of it.
/// Each complex probe phi is split into the real functionals phi and -i phi.
AdjointReport check_adjoint_inequality(const ParticleMeasure& mu, const VectorField& field,
                                       const std::vector<ControlSignal>& signals, double tau,
                                       double t, const TestBank& bank, double step,
                                       std::size_t convex_samples = 8, std::uint64_t seed = 0);

/// CSV with header x_0..x_{d-1},w_re,w_im.
void write_measure_csv(std::ostream& out, const ParticleMeasure& mu);

}  // namespace setkoop
