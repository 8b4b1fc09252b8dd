#pragma once

#include <span>
#include <vector>

#include "dgks/types.hpp"
#include "dgks/uniform_grid.hpp"

namespace dgks {

// Periodic computational box with lower corner at the origin.
struct Domain {
  Vec3 extents = Vec3::Ones();

  explicit Domain(const Vec3& e);
  Domain() = default;

  double volume() const { return extents.prod(); }
  Vec3 wrap(const Vec3& x) const;
  Vec3 minimal_image(const Vec3& d) const;
};

struct Element {
  int index = 0;
  Index3 cell{0, 0, 0};
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  std::vector<int> atom_ids;

  Vec3 extent() const { return hi - lo; }
  double volume() const { return extent().prod(); }
};

// A face is stored on the upper side (along `axis`) of `lower`; `upper` is the
// element across it. Under periodic wrap `lower == upper` is allowed.
struct Face {
  int lower = 0;
  int upper = 0;
  int axis = 0;
  Vec3 normal_lower = Vec3::Zero();  // outward normal of `lower`: +e_axis
  Vec3 normal_upper = Vec3::Zero();  // outward normal of `upper`: -e_axis
};

enum class Side { Lower = 0, Upper = 1 };

struct Partition {
  Domain domain;
  Index3 counts{1, 1, 1};
  Vec3 element_extent = Vec3::Ones();
  std::vector<Element> elements;
  std::vector<Face> faces;

  int size() const { return static_cast<int>(elements.size()); }
  int element_at(const Index3& cell) const;
  int neighbor(int element, int axis, Side side) const;
  // Index of the face on the given side of an element.
  int face_of(int element, int axis, Side side) const;
  // Element containing a point, half-open boxes after periodic wrap.
  int locate(const Vec3& x) const;
  double min_edge() const { return element_extent.minCoeff(); }
};

Partition build_partition(const Domain& domain, const Index3& counts,
                          std::span<const Vec3> atoms);

std::vector<Face> face_topology(const Partition& partition);

// Element enlarged symmetrically by `buffer` per axis, with its grid taken as
// a wrapped restriction of the global uniform grid.
struct ExtendedElement {
  int element_index = 0;
  Vec3 buffer = Vec3::Zero();
  Vec3 lo = Vec3::Zero();  // unwrapped; may lie outside the domain
  Vec3 hi = Vec3::Zero();
  UniformGrid grid;
  Index3 offset{0, 0, 0};  // global index of grid node (0,0,0), unwrapped

  Vec3 extent() const { return hi - lo; }
  bool contains(const Vec3& x, const Domain& domain) const;
};

// Periodic distance from x to the closed box [lo, hi].
double box_distance(const Domain& domain, const Vec3& lo, const Vec3& hi, const Vec3& x);

ExtendedElement extended_element(const Partition& partition, const UniformGrid& global,
                                 int k, const Vec3& buffer);

}  // namespace dgks
