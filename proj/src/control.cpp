#include "setkoop/control.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "setkoop/errors.hpp"

namespace setkoop {

namespace {

constexpr double kTimeSlack = 1e-9;

bool is_boundary(double time, double horizon, int segments) {
  const double position = time / horizon * segments;
  return std::abs(position - std::round(position)) <= kTimeSlack * segments;
}

}  // namespace

ControlSampleSet::ControlSampleSet(std::vector<Vector> coords) {
  if (coords.empty()) throw InvalidArgument("control sample must be nonempty");
  const auto dim = coords.front().size();
  points_.reserve(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i].size() != dim) throw InvalidArgument("control sample has mixed dimensions");
    if (!coords[i].allFinite()) throw InvalidArgument("control coordinates must be finite");
    points_.push_back({std::move(coords[i]), static_cast<int>(i)});
  }
}

ControlSampleSet ControlSampleSet::scalars(const std::vector<double>& values) {
  std::vector<Vector> coords;
  for (double v : values) coords.push_back(Vector::Constant(1, v));
  return ControlSampleSet(std::move(coords));
}

const ControlPoint& ControlSampleSet::at(int id) const {
  if (id < 0 || id >= static_cast<int>(points_.size()))
    throw InvalidArgument("control id " + std::to_string(id) + " out of range");
  return points_[id];
}

double ControlSampleSet::distance(int a, int b) const {
  return (at(a).coords - at(b).coords).norm();
}

ControlSignal::ControlSignal(ControlSamplePtr controls, double horizon, std::vector<int> values,
                             std::string name)
    : controls_(std::move(controls)), horizon_(horizon), values_(std::move(values)),
      name_(std::move(name)) {
  if (!controls_) throw InvalidArgument("control signal needs a control sample");
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_))
    throw InvalidArgument("control horizon must be positive");
  if (values_.empty()) throw InvalidArgument("control signal needs at least one segment");
  for (int id : values_) controls_->at(id);
  if (name_.empty()) {
    name_ = "u[";
    for (std::size_t i = 0; i < values_.size() && i < 8; ++i) {
      if (i) name_ += ",";
      name_ += std::to_string(values_[i]);
    }
    if (values_.size() > 8) name_ += ",...";
    name_ += "]";
  }
}

ControlSignal ControlSignal::constant(ControlSamplePtr controls, double horizon, int id) {
  return ControlSignal(std::move(controls), horizon, {id}, "const" + std::to_string(id));
}

ControlSignal ControlSignal::splice(const ControlSignal& first, const ControlSignal& second,
                                    double switch_time, int segments) {
  if (std::abs(first.horizon() - second.horizon()) > kTimeSlack)
    throw InvalidArgument("splice requires equal horizons");
  if (segments % first.segments() != 0 || segments % second.segments() != 0)
    throw InvalidArgument("splice grid must refine both signals");
  const double horizon = first.horizon();
  if (!is_boundary(switch_time, horizon, segments))
    throw InvalidArgument("splice time must lie on a segment boundary");
  std::vector<int> values(segments);
  const double length = horizon / segments;
  for (int j = 0; j < segments; ++j) {
    const double mid = (j + 0.5) * length;
    values[j] = mid < switch_time ? first.id_at(mid) : second.id_at(mid);
  }
  return ControlSignal(first.controls_ptr(), horizon, std::move(values),
                       first.name() + "|" + second.name());
}

int ControlSignal::segment_index(double time) const {
  const int n = segments();
  const auto index = static_cast<int>(std::floor(time / horizon_ * n));
  return std::clamp(index, 0, n - 1);
}

bool ControlSignal::agrees_on(const ControlSignal& other, double a, double b) const {
  const auto breaks = common_breakpoints(*this, other);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = std::max(a, breaks[i]);
    const double hi = std::min(b, breaks[i + 1]);
    if (hi - lo <= kTimeSlack) continue;
    const double mid = 0.5 * (lo + hi);
    if ((value_at(mid) - other.value_at(mid)).norm() != 0.0) return false;
  }
  return true;
}

std::vector<double> common_breakpoints(const ControlSignal& u, const ControlSignal& v) {
  if (std::abs(u.horizon() - v.horizon()) > kTimeSlack)
    throw InvalidArgument("control signals have different horizons");
  std::vector<double> breaks;
  for (int j = 0; j <= u.segments(); ++j) breaks.push_back(j * u.segment_length());
  for (int j = 0; j <= v.segments(); ++j) breaks.push_back(j * v.segment_length());
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> unique;
  for (double b : breaks)
    if (unique.empty() || b - unique.back() > kTimeSlack) unique.push_back(b);
  unique.back() = u.horizon();
  return unique;
}

double control_distance(const ControlSignal& u, const ControlSignal& v) {
  const auto breaks = common_breakpoints(u, v);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double mid = 0.5 * (breaks[i] + breaks[i + 1]);
    total += (u.value_at(mid) - v.value_at(mid)).norm() * (breaks[i + 1] - breaks[i]);
  }
  return total;
}

std::vector<ControlSignal> constant_signals(const ControlSamplePtr& controls, double horizon) {
  std::vector<ControlSignal> out;
  for (const auto& p : controls->points()) out.push_back(ControlSignal::constant(controls, horizon, p.id));
  return out;
}

}  // namespace setkoop
