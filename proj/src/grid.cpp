#include "setkoop/grid.hpp"

#include <algorithm>
#include <cmath>

#include "setkoop/errors.hpp"

namespace setkoop {

SpatialGrid::SpatialGrid(Vector lower, Vector upper, int points_per_axis)
    : lower_(std::move(lower)), upper_(std::move(upper)), points_per_axis_(points_per_axis) {
  if (lower_.size() == 0 || lower_.size() != upper_.size())
    throw InvalidArgument("grid corners must be nonempty and of equal dimension");
  if (points_per_axis_ < 2) throw InvalidArgument("grid needs at least 2 points per axis");
  if (!lower_.allFinite() || !upper_.allFinite() || !(lower_.array() < upper_.array()).all())
    throw InvalidArgument("grid box is degenerate");
  size_ = 1;
  for (int k = 0; k < dim(); ++k) size_ *= static_cast<std::size_t>(points_per_axis_);
  nodes_.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) nodes_.push_back(node(i));
}

SpatialGrid SpatialGrid::cube(int dim, double lo, double hi, int points_per_axis) {
  return SpatialGrid(Vector::Constant(dim, lo), Vector::Constant(dim, hi), points_per_axis);
}

double SpatialGrid::spacing(int axis) const {
  return (upper_(axis) - lower_(axis)) / (points_per_axis_ - 1);
}

Vector SpatialGrid::node(std::size_t index) const {
  Vector x(dim());
  for (int k = dim() - 1; k >= 0; --k) {
    const auto i = static_cast<int>(index % points_per_axis_);
    index /= points_per_axis_;
    // Endpoints are pinned so the box corners are exact nodes.
    if (i == 0)
      x(k) = lower_(k);
    else if (i == points_per_axis_ - 1)
      x(k) = upper_(k);
    else
      x(k) = lower_(k) + i * spacing(k);
  }
  return x;
}

bool SpatialGrid::contains(const Vector& x, double slack) const {
  if (x.size() != dim()) return false;
  for (int k = 0; k < dim(); ++k)
    if (x(k) < lower_(k) - slack || x(k) > upper_(k) + slack) return false;
  return true;
}

double SpatialGrid::max_norm() const {
  double r = 0.0;
  for (const auto& x : nodes_) r = std::max(r, x.norm());
  return r;
}

bool SpatialGrid::operator==(const SpatialGrid& other) const {
  return points_per_axis_ == other.points_per_axis_ && lower_.size() == other.lower_.size() &&
         lower_ == other.lower_ && upper_ == other.upper_;
}

}  // namespace setkoop
