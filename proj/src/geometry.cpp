#include "dgks/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dgks {

namespace {

constexpr const char* kAxisName[3] = {"x", "y", "z"};

}  // namespace

Domain::Domain(const Vec3& e) : extents(e) {
  for (int a = 0; a < 3; ++a) {
    if (!(e[a] > 0.0)) {
      throw ConfigError(std::string("domain extent along ") + kAxisName[a] + " must be positive");
    }
  }
}

Vec3 Domain::wrap(const Vec3& x) const {
  return {dgks::wrap(x[0], extents[0]), dgks::wrap(x[1], extents[1]),
          dgks::wrap(x[2], extents[2])};
}

Vec3 Domain::minimal_image(const Vec3& d) const {
  return {dgks::minimal_image(d[0], extents[0]), dgks::minimal_image(d[1], extents[1]),
          dgks::minimal_image(d[2], extents[2])};
}

int Partition::element_at(const Index3& cell) const {
  const int i = wrap_index(cell[0], counts[0]);
  const int j = wrap_index(cell[1], counts[1]);
  const int k = wrap_index(cell[2], counts[2]);
  return i + counts[0] * (j + counts[1] * k);
}

int Partition::neighbor(int element, int axis, Side side) const {
  Index3 c = elements[element].cell;
  c[axis] += (side == Side::Upper) ? 1 : -1;
  return element_at(c);
}

int Partition::face_of(int element, int axis, Side side) const {
  // Faces are generated as 3 per element, on each upper side.
  const int owner = (side == Side::Upper) ? element : neighbor(element, axis, Side::Lower);
  return 3 * owner + axis;
}

int Partition::locate(const Vec3& x) const {
  const Vec3 w = domain.wrap(x);
  Index3 c{};
  for (int a = 0; a < 3; ++a) {
    c[a] = std::clamp(static_cast<int>(std::floor(w[a] / element_extent[a])), 0, counts[a] - 1);
  }
  return element_at(c);
}

Partition build_partition(const Domain& domain, const Index3& counts,
                          std::span<const Vec3> atoms) {
  for (int a = 0; a < 3; ++a) {
    if (counts[a] < 1) {
      throw ConfigError(std::string("partition count along ") + kAxisName[a] + " must be >= 1");
    }
  }
  Partition p;
  p.domain = domain;
  p.counts = counts;
  for (int a = 0; a < 3; ++a) p.element_extent[a] = domain.extents[a] / counts[a];

  p.elements.resize(static_cast<std::size_t>(product(counts)));
  for (int k = 0; k < counts[2]; ++k) {
    for (int j = 0; j < counts[1]; ++j) {
      for (int i = 0; i < counts[0]; ++i) {
        const int idx = p.element_at({i, j, k});
        Element& e = p.elements[idx];
        e.index = idx;
        e.cell = {i, j, k};
        for (int a = 0; a < 3; ++a) {
          e.lo[a] = e.cell[a] * p.element_extent[a];
          // Upper corners are computed from counts so the last one is exact.
          e.hi[a] = (e.cell[a] + 1 == counts[a]) ? domain.extents[a]
                                                  : (e.cell[a] + 1) * p.element_extent[a];
        }
      }
    }
  }
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    p.elements[p.locate(atoms[i])].atom_ids.push_back(static_cast<int>(i));
  }
  p.faces = face_topology(p);
  return p;
}

std::vector<Face> face_topology(const Partition& partition) {
  std::vector<Face> faces;
  faces.reserve(3 * partition.elements.size());
  for (const Element& e : partition.elements) {
    for (int a = 0; a < 3; ++a) {
      Face f;
      f.lower = e.index;
      f.upper = partition.neighbor(e.index, a, Side::Upper);
      f.axis = a;
      f.normal_lower = Vec3::Unit(a);
      f.normal_upper = -Vec3::Unit(a);
      faces.push_back(f);
    }
  }
  return faces;
}

bool ExtendedElement::contains(const Vec3& x, const Domain& domain) const {
  for (int a = 0; a < 3; ++a) {
    const double d = dgks::wrap(x[a] - lo[a], domain.extents[a]);
    if (d >= hi[a] - lo[a]) return false;
  }
  return true;
}

double box_distance(const Domain& domain, const Vec3& lo, const Vec3& hi, const Vec3& x) {
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double ext = hi[a] - lo[a];
    const double c = dgks::wrap(x[a] - lo[a], domain.extents[a]);
    if (c <= ext) continue;
    const double d = std::min(c - ext, domain.extents[a] - c);
    d2 += d * d;
  }
  return std::sqrt(d2);
}

ExtendedElement extended_element(const Partition& partition, const UniformGrid& global, int k,
                                 const Vec3& buffer) {
  const Element& e = partition.elements.at(k);
  ExtendedElement q;
  q.element_index = k;
  q.buffer = buffer;
  for (int a = 0; a < 3; ++a) {
    const double cap = 0.5 * (partition.domain.extents[a] - partition.element_extent[a]);
    const double tol = 1e-9 * partition.domain.extents[a];
    if (buffer[a] < 0.0 || buffer[a] > cap + tol) {
      throw ConfigError(std::string("buffer along ") + kAxisName[a] + " is " +
                        std::to_string(buffer[a]) + ", admissible range is [0, " +
                        std::to_string(cap) + "]");
    }
    const double h = global.spacing(a);
    const double nb = buffer[a] / h;
    const double ne = partition.element_extent[a] / h;
    const double n0 = e.lo[a] / h;
    if (std::abs(nb - std::round(nb)) > 1e-8 || std::abs(ne - std::round(ne)) > 1e-8 ||
        std::abs(n0 - std::round(n0)) > 1e-8) {
      throw ConfigError(std::string("buffer/element along ") + kAxisName[a] +
                        " is not a multiple of the global grid spacing");
    }
    const int ib = static_cast<int>(std::lround(nb));
    q.offset[a] = static_cast<int>(std::lround(n0)) - ib;
    q.grid.n[a] = static_cast<int>(std::lround(ne)) + 2 * ib;
    q.lo[a] = e.lo[a] - ib * h;
    q.hi[a] = e.hi[a] + ib * h;
    q.grid.lo[a] = q.lo[a];
    q.grid.extent[a] = q.hi[a] - q.lo[a];
  }
  return q;
}

}  // namespace dgks
