#pragma once

#include <memory>
#include <string>
#include <vector>

#include "setkoop/types.hpp"

namespace setkoop {

struct ControlPoint {
  Vector coords;
  int id = 0;
};

/// Finite sample of a compact control set U, with the Euclidean distance on
/// coordinates. Ids are positions in the sample.
class ControlSampleSet {
 public:
  explicit ControlSampleSet(std::vector<Vector> coords);

  /// One-dimensional sample from scalar values.
  static ControlSampleSet scalars(const std::vector<double>& values);

  const std::vector<ControlPoint>& points() const { return points_; }
  const ControlPoint& at(int id) const;
  std::size_t size() const { return points_.size(); }
  int dim() const { return static_cast<int>(points_.front().coords.size()); }

  double distance(int a, int b) const;

 private:
  std::vector<ControlPoint> points_;
};

using ControlSamplePtr = std::shared_ptr<const ControlSampleSet>;

/// Piecewise-constant, right-continuous control signal on a uniform grid of
/// [0, horizon]. Segment values are ids into the shared control sample.
class ControlSignal {
 public:
  ControlSignal(ControlSamplePtr controls, double horizon, std::vector<int> values,
                std::string name = {});

  static ControlSignal constant(ControlSamplePtr controls, double horizon, int id);

  /// Equal to `first` on [0, switch_time) and to `second` on [switch_time, T].
  /// `segments` must refine both inputs and put `switch_time` on a boundary.
  static ControlSignal splice(const ControlSignal& first, const ControlSignal& second,
                              double switch_time, int segments);

  double horizon() const { return horizon_; }
  int segments() const { return static_cast<int>(values_.size()); }
  const std::vector<int>& values() const { return values_; }
  double segment_length() const { return horizon_ / segments(); }
  const std::string& name() const { return name_; }
  const ControlSampleSet& controls() const { return *controls_; }
  const ControlSamplePtr& controls_ptr() const { return controls_; }

  int segment_index(double time) const;
  int id_at(double time) const { return values_[segment_index(time)]; }
  const Vector& value_at(double time) const { return controls_->at(id_at(time)).coords; }

  /// True when both signals take equal control values on [a, b) up to a null set.
  bool agrees_on(const ControlSignal& other, double a, double b) const;

 private:
  ControlSamplePtr controls_;
  double horizon_;
  std::vector<int> values_;
  std::string name_;
};

/// Integral over [0, T] of the control distance between two signals.
double control_distance(const ControlSignal& u, const ControlSignal& v);

/// Constant signals, one per sampled control, in id order.
std::vector<ControlSignal> constant_signals(const ControlSamplePtr& controls, double horizon);

/// Segment boundaries of the common refinement of the two signals.
std::vector<double> common_breakpoints(const ControlSignal& u, const ControlSignal& v);

}  // namespace setkoop
