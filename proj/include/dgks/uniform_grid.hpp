#pragma once

#include "dgks/types.hpp"

namespace dgks {

// Uniform periodic Cartesian grid on an axis-aligned box. Node (i, j, k) sits at
// lo + (i, j, k) * spacing; there is no node at the upper face. Values are
// stored x-fastest: flat = i + n[0] * (j + n[1] * k).
struct UniformGrid {
  Vec3 lo = Vec3::Zero();
  Vec3 extent = Vec3::Ones();
  Index3 n{1, 1, 1};

  double spacing(int axis) const { return extent[axis] / n[axis]; }
  double volume() const { return extent.prod(); }
  double cell_volume() const { return volume() / static_cast<double>(size()); }
  Eigen::Index size() const { return static_cast<Eigen::Index>(product(n)); }

  Eigen::Index flat(int i, int j, int k) const {
    return i + static_cast<Eigen::Index>(n[0]) * (j + static_cast<Eigen::Index>(n[1]) * k);
  }
  double coordinate(int axis, int i) const { return lo[axis] + i * spacing(axis); }
  Vec3 node(int i, int j, int k) const {
    return {coordinate(0, i), coordinate(1, j), coordinate(2, k)};
  }
};

}  // namespace dgks
