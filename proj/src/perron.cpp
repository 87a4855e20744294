#include "setkoop/perron.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "setkoop/csv.hpp"
#include "setkoop/errors.hpp"
#include "setkoop/flow.hpp"
#include "setkoop/set_ops.hpp"

namespace setkoop {

ParticleMeasure ParticleMeasure::dirac(Vector position, Complex weight) {
  return ParticleMeasure{{Particle{std::move(position), weight}}};
}

double ParticleMeasure::total_variation() const {
  double total = 0.0;
  for (const auto& p : particles) total += std::abs(p.weight);
  return total;
}

Complex pairing(const ParticleMeasure& mu, const Observable& phi) {
  Complex total = 0.0;
  for (const auto& p : mu.particles) total += p.weight * phi.eval(p.position);
  return total;
}

ParticleMeasure pushforward(const ParticleMeasure& mu, const VectorField& field,
                            const ControlSignal& signal, double tau, double t, double step) {
  ParticleMeasure out;
  out.particles.reserve(mu.particles.size());
  for (const auto& p : mu.particles)
    out.particles.push_back(
        {integrate_flow(field, signal, tau, t, p.position, step).final_state, p.weight});
  return out;
}

double check_duality(const ParticleMeasure& mu, const Observable& phi, const VectorField& field,
                     const ControlSignal& signal, double tau, double t, double step) {
  const Complex pushed = pairing(pushforward(mu, field, signal, tau, t, step), phi);
  // phi o Phi^u evaluated exactly at the particle positions.
  Complex pulled = 0.0;
  for (const auto& p : mu.particles)
    pulled += p.weight * phi.eval(integrate_flow(field, signal, tau, t, p.position, step).final_state);
  return std::abs(pushed - pulled);
}

Complex divergence_pairing(const ParticleMeasure& mu, const VectorField& field,
                           const ControlPoint& u, const Observable& zeta) {
  if (!zeta.is_c1()) throw InvalidArgument("divergence pairing needs a C1 test function");
  Complex total = 0.0;
  for (const auto& p : mu.particles) {
    const Vector f = field.evaluate(p.position, u.coords);
    total += p.weight * zeta.gradient(p.position).cwiseProduct(f.cast<Complex>()).sum();
  }
  return total;
}

std::vector<PerronGeneratorRow> perron_generator_study(const ParticleMeasure& mu,
                                                       const VectorField& field,
                                                       const ControlSamplePtr& controls,
                                                       double tau,
                                                       const std::vector<double>& h_values,
                                                       const TestBank& bank, double step,
                                                       double horizon) {
  if (bank.functions.empty()) throw InvalidArgument("test bank is empty");
  for (double h : h_values)
    if (!(h > 0.0) || tau + h > horizon * (1.0 + 1e-12))
      throw InvalidArgument("h must be positive and within the horizon");
  std::vector<PerronGeneratorRow> rows;
  for (double h : h_values)
    for (const auto& u : controls->points()) {
      const auto signal = ControlSignal::constant(controls, horizon, u.id);
      const auto pushed = pushforward(mu, field, signal, tau, tau + h, step);
      double worst = 0.0;
      for (const auto& zeta : bank.functions) {
        const Complex quotient = (pairing(pushed, zeta) - pairing(mu, zeta)) / h;
        worst = std::max(worst, std::abs(quotient - divergence_pairing(mu, field, u, zeta)));
      }
      rows.push_back({h, u.id, worst});
    }
  return rows;
}

std::vector<double> residuals_for_control(const std::vector<PerronGeneratorRow>& rows, int control_id) {
  std::vector<double> out;
  for (const auto& r : rows)
    if (r.control_id == control_id) out.push_back(r.residual);
  return out;
}

AdjointReport check_adjoint_inequality(const ParticleMeasure& mu, const VectorField& field,
                                       const std::vector<ControlSignal>& signals, double tau,
                                       double t, const TestBank& bank, double step,
                                       std::size_t convex_samples, std::uint64_t seed) {
  if (bank.functions.empty()) throw InvalidArgument("test bank is empty");
  if (signals.empty()) throw InvalidArgument("adjoint check needs at least one signal");

  std::vector<ParticleMeasure> perron;
  for (const auto& u : signals) perron.push_back(pushforward(mu, field, u, tau, t, step));

  std::vector<Observable> probes;
  for (const auto& phi : bank.functions) {
    probes.push_back(phi);
    probes.push_back(Complex(0.0, -1.0) * phi);
  }

  const auto weights = simplex_weights(perron.size(), convex_samples, seed);

  AdjointReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& phi : probes) {
    // Re<P^u mu, phi> for each signal; equal to Re<mu, phi o Phi^u>.
    std::vector<double> pushed;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < signals.size(); ++k) {
      pushed.push_back(pairing(perron[k], phi).real());
      Complex pulled = 0.0;
      for (std::size_t i = 0; i < mu.particles.size(); ++i)
        pulled += mu.particles[i].weight * phi.eval(perron[k].particles[i].position);
      best = std::max(best, pulled.real());
      report.matched_gap = std::max(report.matched_gap, std::abs(pushed.back() - pulled.real()));
    }
    for (double value : pushed) {
      report.worst_margin = std::min(report.worst_margin, best - value);
      ++report.comparisons;
    }
    for (const auto& w : weights) {
      // sum_k w_k (best - value_k), exact when the values coincide
      double margin = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) margin += w[k] * (best - pushed[k]);
      report.worst_margin = std::min(report.worst_margin, margin);
      ++report.comparisons;
    }
  }
  return report;
}

void write_measure_csv(std::ostream& out, const ParticleMeasure& mu) {
  const int d = mu.particles.empty() ? 0 : static_cast<int>(mu.particles.front().position.size());
  std::vector<std::string> header;
  for (int k = 0; k < d; ++k) header.push_back("x_" + std::to_string(k));
  header.push_back("w_re");
  header.push_back("w_im");
  write_csv_row(out, header);
  for (const auto& p : mu.particles) {
    std::vector<double> row(p.position.data(), p.position.data() + p.position.size());
    row.push_back(p.weight.real());
    row.push_back(p.weight.imag());
    write_csv_row(out, row);
  }
}

}  // namespace setkoop
