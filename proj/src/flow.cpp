#include "setkoop/flow.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "setkoop/csv.hpp"
#include "setkoop/errors.hpp"

namespace setkoop {

namespace {

constexpr double kTimeSlack = 1e-12;

std::string divergence_message(double time, std::optional<std::size_t> node) {
  std::ostringstream os;
  os << "flow diverged at time " << format_number(time);
  if (node) os << " (grid node " << *node << ")";
  return os.str();
}

struct Piece {
  double start;
  double end;
  int control_id;
};

// Splits [tau, t] (either orientation) at the control switches.
std::vector<Piece> pieces(const ControlSignal& signal, double tau, double t) {
  const double lo = std::min(tau, t);
  const double hi = std::max(tau, t);
  std::vector<double> cuts{lo};
  const double length = signal.segment_length();
  for (int j = 1; j < signal.segments(); ++j) {
    const double b = j * length;
    if (b > lo + kTimeSlack && b < hi - kTimeSlack) cuts.push_back(b);
  }
  cuts.push_back(hi);
  std::vector<Piece> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    out.push_back({cuts[i], cuts[i + 1], signal.id_at(0.5 * (cuts[i] + cuts[i + 1]))});
  if (t < tau) {
    std::reverse(out.begin(), out.end());
    for (auto& p : out) std::swap(p.start, p.end);
  }
  return out;
}

void validate(const VectorField& field, const ControlSignal& signal, double tau, double t,
              const Vector& x0, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("integration step must be positive");
  const double horizon = signal.horizon();
  const double slack = 1e-9 * horizon;
  if (tau < -slack || t < -slack || tau > horizon + slack || t > horizon + slack)
    throw InvalidArgument("flow times must lie in [0, T]");
  if (x0.size() != field.state_dim()) throw InvalidArgument("initial state has wrong dimension");
  if (signal.controls().dim() != field.control_dim())
    throw InvalidArgument("control dimension does not match the vector field");
}

int step_count(double length, double step) {
  return std::max(1, static_cast<int>(std::ceil(std::abs(length) / step - 1e-9)));
}

}  // namespace

DivergenceError::DivergenceError(double time, std::optional<std::size_t> node)
    : Error(divergence_message(time, node)), time_(time), node_(node) {}

FlowResult integrate_flow(const VectorField& field, const ControlSignal& signal, double tau,
                          double t, const Vector& x0, double step, bool record) {
  validate(field, signal, tau, t, x0, step);
  FlowResult result;
  result.start_time = tau;
  result.end_time = t;
  result.initial_state = x0;
  result.final_state = x0;
  if (record) result.trajectory.push_back({tau, x0});
  if (tau == t) return result;

  Vector x = x0;
  for (const auto& piece : pieces(signal, tau, t)) {
    const Vector& u = signal.controls().at(piece.control_id).coords;
    const int n = step_count(piece.end - piece.start, step);
    const double h = (piece.end - piece.start) / n;
    result.step = std::max(result.step, std::abs(h));
    for (int i = 0; i < n; ++i) {
      const Vector k1 = field.evaluate(x, u);
      const Vector k2 = field.evaluate(x + 0.5 * h * k1, u);
      const Vector k3 = field.evaluate(x + 0.5 * h * k2, u);
      const Vector k4 = field.evaluate(x + h * k3, u);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const double time = i + 1 == n ? piece.end : piece.start + (i + 1) * h;
      if (!x.allFinite()) throw DivergenceError(time);
      if (record) result.trajectory.push_back({time, x});
    }
  }
  result.final_state = std::move(x);
  return result;
}

FlowWithJacobian integrate_flow_jacobian(const VectorField& field, const ControlSignal& signal,
                                         double tau, double t, const Vector& x0, double step) {
  validate(field, signal, tau, t, x0, step);
  Vector x = x0;
  Matrix jac = Matrix::Identity(x0.size(), x0.size());
  if (tau == t) return {x, jac};
  for (const auto& piece : pieces(signal, tau, t)) {
    const Vector& u = signal.controls().at(piece.control_id).coords;
    const int n = step_count(piece.end - piece.start, step);
    const double h = (piece.end - piece.start) / n;
    for (int i = 0; i < n; ++i) {
      const Vector k1 = field.evaluate(x, u);
      const Matrix j1 = field.jacobian(x, u) * jac;
      const Vector x2 = x + 0.5 * h * k1;
      const Vector k2 = field.evaluate(x2, u);
      const Matrix j2 = field.jacobian(x2, u) * (jac + 0.5 * h * j1);
      const Vector x3 = x + 0.5 * h * k2;
      const Vector k3 = field.evaluate(x3, u);
      const Matrix j3 = field.jacobian(x3, u) * (jac + 0.5 * h * j2);
      const Vector x4 = x + h * k3;
      const Vector k4 = field.evaluate(x4, u);
      const Matrix j4 = field.jacobian(x4, u) * (jac + h * j3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      jac += (h / 6.0) * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
      if (!x.allFinite() || !jac.allFinite())
        throw DivergenceError(i + 1 == n ? piece.end : piece.start + (i + 1) * h);
    }
  }
  return {x, jac};
}

std::vector<Vector> flow_on_grid(const VectorField& field, const ControlSignal& signal,
                                 double tau, double t, const SpatialGrid& grid, double step) {
  std::vector<Vector> out;
  out.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    try {
      out.push_back(integrate_flow(field, signal, tau, t, grid.nodes()[i], step).final_state);
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.time(), i);
    }
  }
  return out;
}

FlowEstimateReport check_flow_estimates(const VectorField& field,
                                        const std::vector<ControlSignal>& signals,
                                        const SpatialGrid& grid, double radius, double step,
                                        int time_samples) {
  if (signals.empty()) throw InvalidArgument("flow estimates need at least one signal");
  if (time_samples < 2) throw InvalidArgument("flow estimates need at least two time samples");
  for (const auto& x : grid.nodes())
    if (x.norm() > radius * (1.0 + 1e-12))
      throw InvalidArgument("grid node outside the ball B(0, R)");

  struct Sample {
    double tau, t;
    const Vector* x;
    Vector y;
  };

  FlowEstimateReport report;
  bool finite = true;
  double horizon = 0.0;
  double growth = 0.0;
  for (const auto& signal : signals) {
    horizon = std::max(horizon, signal.horizon());
    growth = std::max(growth, field.bounds(signal.controls()).growth);
    const double T = signal.horizon();
    std::vector<Sample> samples;
    for (int a = 0; a < time_samples; ++a)
      for (int b = a; b < time_samples; ++b) {
        const double tau = T * a / (time_samples - 1);
        const double t = T * b / (time_samples - 1);
        const auto flowed = flow_on_grid(field, signal, tau, t, grid, step);
        for (std::size_t i = 0; i < grid.size(); ++i)
          samples.push_back({tau, t, &grid.nodes()[i], flowed[i]});
      }
    for (const auto& s : samples) {
      finite = finite && s.y.allFinite();
      report.max_norm_observed = std::max(report.max_norm_observed, s.y.norm());
    }
    for (std::size_t i = 0; i < samples.size(); ++i)
      for (std::size_t j = i + 1; j < samples.size(); ++j) {
        const auto& p = samples[i];
        const auto& q = samples[j];
        const double gap = std::abs(p.tau - q.tau) + std::abs(p.t - q.t) + (*p.x - *q.x).norm();
        if (gap > 0)
          report.lipschitz_observed =
              std::max(report.lipschitz_observed, (p.y - q.y).norm() / gap);
      }
  }
  report.growth_ok = finite && std::isfinite(report.lipschitz_observed);
  report.gronwall_bound = (radius + growth * horizon) * std::exp(growth * horizon);
  report.within_bound = report.max_norm_observed <= report.gronwall_bound * (1.0 + 1e-12);
  return report;
}

std::vector<ContinuityRow> check_continuity_in_control(
    const VectorField& field, const ControlSignal& reference,
    const std::vector<ControlSignal>& perturbations, const SpatialGrid& grid, double tau, double t,
    double step) {
  std::vector<ContinuityRow> rows;
  const auto base = flow_on_grid(field, reference, tau, t, grid, step);
  for (const auto& v : perturbations) {
    const double d = control_distance(reference, v);
    if (!rows.empty() && d > rows.back().control_distance)
      throw InvalidArgument("perturbation distances must not increase");
    const auto flowed = flow_on_grid(field, v, tau, t, grid, step);
    double disc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) disc = std::max(disc, (flowed[i] - base[i]).norm());
    rows.push_back({d, disc});
  }
  return rows;
}

bool discrepancies_non_increasing(const std::vector<ContinuityRow>& rows, double slack) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].flow_discrepancy > slack * rows[i - 1].flow_discrepancy) return false;
  return true;
}

void write_trajectory_csv(std::ostream& out, const FlowResult& flow) {
  std::vector<std::string> header{"time"};
  for (Eigen::Index k = 0; k < flow.initial_state.size(); ++k)
    header.push_back("state_" + std::to_string(k));
  write_csv_row(out, header);
  auto row = [&](double time, const Vector& x) {
    std::vector<double> cells{time};
    for (Eigen::Index k = 0; k < x.size(); ++k) cells.push_back(x(k));
    write_csv_row(out, cells);
  };
  if (flow.trajectory.empty()) {
    row(flow.start_time, flow.initial_state);
    row(flow.end_time, flow.final_state);
  } else {
    for (const auto& p : flow.trajectory) row(p.time, p.state);
  }
}

}  // namespace setkoop
