#include "setkoop/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "setkoop/csv.hpp"
#include "setkoop/errors.hpp"
#include "setkoop/koopman.hpp"

namespace setkoop {

namespace {

bool is_integer_ratio(double a, double b) {
  const double r = a / b;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, std::abs(r));
}

std::vector<double> column(const std::vector<GeneratorRow>& rows, double GeneratorRow::*member) {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.*member);
  return out;
}

}  // namespace

ObservableSet liouville_set(const Observable& phi, const VectorField& field,
                            const ControlSampleSet& controls, const SpatialGrid& grid) {
  if (!phi.is_c1()) throw InvalidArgument("Liouville operator needs a C1 observable");
  if (phi.dim() != field.state_dim() || grid.dim() != field.state_dim())
    throw InvalidArgument("dimension mismatch in liouville_set");
  std::vector<CVector> gradients;
  gradients.reserve(grid.size());
  for (const auto& x : grid.nodes()) gradients.push_back(phi.gradient(x));
  ObservableSet out;
  for (const auto& p : controls.points()) {
    std::vector<Complex> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Vector f = field.evaluate(grid.nodes()[i], p.coords);
      values[i] = gradients[i].cwiseProduct(f.cast<Complex>()).sum();
    }
    out.add(Observable::grid_sampled(grid, std::move(values)), "u" + std::to_string(p.id));
  }
  return out;
}

std::vector<double> GeneratorStudy::h_values() const { return column(rows, &GeneratorRow::h); }
std::vector<double> GeneratorStudy::backward() const {
  return column(rows, &GeneratorRow::backward_defect);
}
std::vector<double> GeneratorStudy::forward() const {
  return column(rows, &GeneratorRow::forward_defect);
}
std::vector<double> GeneratorStudy::forward_convexified() const {
  return column(rows, &GeneratorRow::forward_defect_convexified);
}

ControlSignal chattering_signal(const ControlSamplePtr& controls, const std::vector<double>& weights,
                                int resolution, int periods, double h, double horizon) {
  if (weights.size() != controls->size()) throw InvalidArgument("one weight per control is required");
  if (resolution < 1 || periods < 1) throw InvalidArgument("chattering resolution and periods must be positive");
  std::vector<int> pattern;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double slots = weights[i] * resolution;
    if (std::abs(slots - std::round(slots)) > 1e-9)
      throw InvalidArgument("chattering weights must be multiples of 1 / resolution");
    pattern.insert(pattern.end(), static_cast<std::size_t>(std::lround(slots)), static_cast<int>(i));
  }
  if (static_cast<int>(pattern.size()) != resolution)
    throw InvalidArgument("chattering weights must sum to one");
  const double segment = h / (periods * resolution);
  if (!is_integer_ratio(horizon, segment))
    throw InvalidArgument("chattering segments do not tile the horizon");
  const auto n = static_cast<int>(std::lround(horizon / segment));
  std::vector<int> values(n);
  for (int j = 0; j < n; ++j) values[j] = pattern[j % resolution];
  std::string name = "chatter(";
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (i) name += ",";
    name += format_number(weights[i]);
  }
  name += ")";
  return ControlSignal(controls, horizon, std::move(values), std::move(name));
}

GeneratorStudy generator_study(const Observable& phi, const VectorField& field,
                               const ControlSamplePtr& controls, double tau,
                               const std::vector<double>& h_values, const SpatialGrid& grid,
                               double step, const GeneratorOptions& options) {
  if (h_values.empty()) throw InvalidArgument("generator study needs h values");
  for (std::size_t i = 0; i < h_values.size(); ++i) {
    if (!(h_values[i] > 0.0)) throw InvalidArgument("h values must be positive");
    if (i && !(h_values[i] < h_values[i - 1])) throw InvalidArgument("h values must be strictly decreasing");
    if (tau < 0.0 || tau + h_values[i] > options.horizon * (1.0 + 1e-12))
      throw InvalidArgument("h exceeds the horizon");
  }

  const ObservableSet liouville = liouville_set(phi, field, *controls, grid);
  ObservableSet convexified = convex_combinations(liouville, options.convex_samples, options.seed);

  std::vector<std::vector<double>> probe_weights;
  if (options.chattering_probes) {
    const std::size_t k = controls->size();
    if (options.probe_resolution % static_cast<int>(k) == 0)
      probe_weights.push_back(std::vector<double>(k, 1.0 / static_cast<double>(k)));
    for (auto& w : simplex_weights(k, options.probe_count, options.seed, options.probe_resolution))
      probe_weights.push_back(std::move(w));
    for (std::size_t i = 0; i < probe_weights.size(); ++i)
      convexified.add(convex_combination(liouville, probe_weights[i]), "probe" + std::to_string(i));
  }

  const auto target = evaluate_members(liouville, grid);
  const auto target_convex = evaluate_members(convexified, grid);
  const auto constants = constant_signals(controls, options.horizon);

  GeneratorStudy study;
  for (double h : h_values) {
    std::vector<ControlSignal> signals = constants;
    for (const auto& w : probe_weights) {
      const double segment = h / (options.probe_periods * options.probe_resolution);
      if (!is_integer_ratio(tau, segment) && tau != 0.0)
        throw InvalidArgument("tau is not aligned with the chattering grid");
      signals.push_back(chattering_signal(controls, w, options.probe_resolution,
                                          options.probe_periods, h, options.horizon));
    }
    const auto quotients = evaluate_members(
        scaled_difference_set(koopman_set(phi, field, signals, tau, tau + h, grid, step), phi, h,
                              grid),
        grid);
    study.rows.push_back({h, one_sided_defect(target, quotients), one_sided_defect(quotients, target),
                          one_sided_defect(quotients, target_convex)});
  }
  study.backward_rate = fit_log_rate(study.h_values(), study.backward());
  study.forward_rate = fit_log_rate(study.h_values(), study.forward());
  study.forward_convexified_rate = fit_log_rate(study.h_values(), study.forward_convexified());
  return study;
}

std::vector<Observable> transport_solve(const Observable& phi, const VectorField& field,
                                        const ControlSignal& signal, double t_final,
                                        const std::vector<double>& tau_grid, double step) {
  if (!phi.is_c1()) throw InvalidArgument("transport solutions need a C1 observable");
  if (!field.is_c1()) throw InvalidArgument("transport solutions need a C1 vector field");
  std::vector<Observable> out;
  out.reserve(tau_grid.size());
  for (double tau : tau_grid) out.push_back(Observable::pullback(phi, field, signal, tau, t_final, step));
  return out;
}

std::vector<ResidualRow> inclusion_residual(const std::vector<TimedObservable>& curve,
                                            const VectorField& field,
                                            const ControlSampleSet& controls,
                                            const SpatialGrid& grid) {
  if (curve.size() < 3) throw InvalidArgument("inclusion residual needs at least 3 samples");
  const double dtau = curve[1].tau - curve[0].tau;
  if (!(dtau > 0.0)) throw InvalidArgument("curve times must increase");
  for (std::size_t i = 2; i < curve.size(); ++i)
    if (std::abs((curve[i].tau - curve[i - 1].tau) - dtau) > 1e-9 * std::max(1.0, dtau))
      throw InvalidArgument("curve must be sampled on a uniform tau grid");

  std::vector<std::vector<Vector>> fields;
  for (const auto& p : controls.points()) {
    std::vector<Vector> f;
    for (const auto& x : grid.nodes()) f.push_back(field.evaluate(x, p.coords));
    fields.push_back(std::move(f));
  }

  std::vector<std::vector<Complex>> values;
  for (const auto& point : curve) values.push_back(point.value.values_on(grid));

  std::vector<ResidualRow> rows;
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    std::vector<Complex> dt(grid.size());
    std::vector<CVector> grad(grid.size());
    for (std::size_t n = 0; n < grid.size(); ++n) {
      dt[n] = (values[i + 1][n] - values[i - 1][n]) / (2.0 * dtau);
      grad[n] = curve[i].value.gradient(grid.nodes()[n]);
    }
    ResidualRow row{curve[i].tau, std::numeric_limits<double>::infinity(), -1, {}};
    for (const auto& p : controls.points()) {
      double worst = 0.0;
      for (std::size_t n = 0; n < grid.size(); ++n) {
        const Complex transport = grad[n].cwiseProduct(fields[p.id][n].cast<Complex>()).sum();
        worst = std::max(worst, std::abs(dt[n] + transport));
      }
      row.per_control.push_back(worst);
      if (worst < row.residual) {
        row.residual = worst;
        row.control_id = p.id;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

void write_generator_csv(std::ostream& out, const GeneratorStudy& study) {
  write_csv_row(out, std::vector<std::string>{"h", "backward_defect", "forward_defect",
                                              "forward_defect_convexified", "fitted_rate"});
  for (const auto& r : study.rows)
    write_csv_row(out, std::vector<double>{r.h, r.backward_defect, r.forward_defect,
                                           r.forward_defect_convexified, study.backward_rate});
}

}  // namespace setkoop
