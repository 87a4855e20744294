#include "setkoop/koopman.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "setkoop/errors.hpp"
#include "setkoop/flow.hpp"

namespace setkoop {

namespace {

int splice_segments(const ControlSignal& u, const ControlSignal& v, double s) {
  const int base = std::lcm(u.segments(), v.segments());
  for (int m = 1; m <= 4096; ++m) {
    const int n = base * m;
    const double position = s / u.horizon() * n;
    if (std::abs(position - std::round(position)) <= 1e-9 * n) return n;
  }
  throw InvalidArgument("splice time is not commensurate with the signal grids");
}

bool contains_splice(const std::vector<ControlSignal>& family, const ControlSignal& u,
                     const ControlSignal& v, double tau, double s, double t) {
  return std::any_of(family.begin(), family.end(), [&](const ControlSignal& w) {
    return w.agrees_on(u, tau, s) && w.agrees_on(v, s, t);
  });
}

}  // namespace

ObservableSet koopman_set(const Observable& phi, const VectorField& field,
                          const std::vector<ControlSignal>& signals, double tau, double t,
                          const SpatialGrid& grid, double step) {
  if (signals.empty()) throw InvalidArgument("koopman_set needs at least one signal");
  ObservableSet out;
  for (const auto& u : signals)
    out.add(compose_with_flow(phi, field, u, tau, t, grid, step), u.name());
  return out;
}

std::vector<ControlSignal> splice_closure(const std::vector<ControlSignal>& signals, double s) {
  std::vector<ControlSignal> out = signals;
  for (const auto& u : signals)
    for (const auto& v : signals) {
      const double horizon = u.horizon();
      if (contains_splice(out, u, v, 0.0, s, horizon)) continue;
      out.push_back(ControlSignal::splice(u, v, s, splice_segments(u, v, s)));
    }
  return out;
}

InclusionReport check_semigroup(const Observable& phi, const VectorField& field,
                                const std::vector<ControlSignal>& signals, double tau, double s,
                                double t, const SpatialGrid& grid, double step,
                                CompositionMode mode) {
  if (!(tau <= s && s <= t)) throw InvalidArgument("semigroup check needs tau <= s <= t");
  if (signals.empty()) throw InvalidArgument("semigroup check needs at least one signal");
  for (const auto& u : signals)
    for (const auto& v : signals)
      if (!contains_splice(signals, u, v, tau, s, t))
        throw InvalidArgument("signal family is not closed under splicing at s");

  const ObservableSet direct = koopman_set(phi, field, signals, tau, t, grid, step);

  ObservableSet composed;
  for (const auto& v : signals) {
    // Outer factor on [s, t]; inner factor on [tau, s].
    const Observable outer = mode == CompositionMode::exact
                                 ? Observable::pullback(phi, field, v, s, t, step)
                                 : compose_with_flow(phi, field, v, s, t, grid, step);
    for (const auto& u : signals)
      composed.add(compose_with_flow(outer, field, u, tau, s, grid, step),
                   u.name() + "*" + v.name());
  }
  return hausdorff(direct, composed, grid);
}

double semigroup_tolerance(double step, double tau, double t, double grid_slack) {
  return 100.0 * std::pow(step, 4) * std::abs(t - tau) + grid_slack;
}

double check_homogeneity(const Observable& phi, double alpha, const VectorField& field,
                         const std::vector<ControlSignal>& signals, double tau, double t,
                         const SpatialGrid& grid, double step) {
  const ObservableSet scaled_input =
      koopman_set(Complex(alpha) * phi, field, signals, tau, t, grid, step);
  const ObservableSet base = koopman_set(phi, field, signals, tau, t, grid, step);
  ObservableSet scaled_output;
  for (std::size_t i = 0; i < base.size(); ++i)
    scaled_output.add(Complex(alpha) * base.members[i], base.labels[i]);
  return hausdorff(scaled_input, scaled_output, grid).hausdorff;
}

double check_subadditivity(const Observable& phi1, const Observable& phi2,
                           const VectorField& field, const std::vector<ControlSignal>& signals,
                           double tau, double t, const SpatialGrid& grid, double step) {
  const auto sum = evaluate_members(koopman_set(phi1 + phi2, field, signals, tau, t, grid, step), grid);
  const auto first = evaluate_members(koopman_set(phi1, field, signals, tau, t, grid, step), grid);
  const auto second = evaluate_members(koopman_set(phi2, field, signals, tau, t, grid, step), grid);
  std::vector<std::vector<Complex>> minkowski;
  for (const auto& a : first)
    for (const auto& b : second) {
      auto c = a;
      for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
      minkowski.push_back(std::move(c));
    }
  return one_sided_defect(sum, minkowski);
}

LipschitzReport check_lipschitz_in_observable(const Observable& phi1, const Observable& phi2,
                                              const VectorField& field,
                                              const std::vector<ControlSignal>& signals,
                                              double tau, double t, const SpatialGrid& grid,
                                              double step) {
  LipschitzReport report;
  report.lhs = one_sided_defect(koopman_set(phi1, field, signals, tau, t, grid, step),
                                koopman_set(phi2, field, signals, tau, t, grid, step), grid);
  for (const auto& u : signals)
    for (const auto& y : flow_on_grid(field, u, tau, t, grid, step))
      report.rhs = std::max(report.rhs, std::abs(phi1.eval(y) - phi2.eval(y)));
  report.ok = report.lhs <= report.rhs + 1e-12;
  return report;
}

std::vector<CurvePoint> build_observable_curve(const Observable& phi, const VectorField& field,
                                               double tau, const std::vector<double>& times,
                                               const std::vector<ScheduleEntry>& schedule,
                                               const SpatialGrid& grid, double step) {
  if (schedule.empty()) throw InvalidArgument("schedule is empty");
  constexpr double slack = 1e-12;
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (std::abs(schedule[i].start - schedule[i - 1].end) > slack)
      throw InvalidArgument("schedule has a gap at " + std::to_string(schedule[i - 1].end));
  const double last = times.empty() ? tau : *std::max_element(times.begin(), times.end());
  const double first = times.empty() ? tau : std::min(tau, *std::min_element(times.begin(), times.end()));
  if (schedule.front().start > first + slack || schedule.back().end < last - slack)
    throw InvalidArgument("schedule does not cover the requested times");

  std::vector<CurvePoint> curve;
  for (double time : times) {
    auto entry = std::find_if(schedule.begin(), schedule.end(), [&](const ScheduleEntry& e) {
      return time >= e.start - slack && time < e.end - slack;
    });
    if (entry == schedule.end()) entry = std::prev(schedule.end());
    curve.push_back({time, compose_with_flow(phi, field, entry->signal, tau, time, grid, step),
                     entry->signal.name()});
  }
  return curve;
}

}  // namespace setkoop
