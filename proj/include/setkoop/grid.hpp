#pragma once

#include <vector>

#include "setkoop/types.hpp"

namespace setkoop {

/// Uniform lattice on an axis-aligned box, corners included. Node index is
/// row-major with the last axis varying fastest.
class SpatialGrid {
 public:
  SpatialGrid(Vector lower, Vector upper, int points_per_axis);

  /// The cube [lo, hi]^dim.
  static SpatialGrid cube(int dim, double lo, double hi, int points_per_axis);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  int points_per_axis() const { return points_per_axis_; }
  std::size_t size() const { return size_; }
  double spacing(int axis) const;

  Vector node(std::size_t index) const;
  const std::vector<Vector>& nodes() const { return nodes_; }

  bool contains(const Vector& x, double slack = 0.0) const;
  double max_norm() const;

  bool operator==(const SpatialGrid& other) const;

 private:
  Vector lower_;
  Vector upper_;
  int points_per_axis_;
  std::size_t size_;
  std::vector<Vector> nodes_;
};

}  // namespace setkoop
