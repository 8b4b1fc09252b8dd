#pragma once

#include <array>
#include <optional>
#include <vector>

#include "dgks/geometry.hpp"
#include "dgks/lgl.hpp"
#include "dgks/uniform_grid.hpp"

namespace dgks {

// Tensor LGL grid on an element box. Nodes, weights and differentiation
// matrices are stored already mapped to physical coordinates.
struct LGLGrid {
  Vec3 lo = Vec3::Zero();
  Vec3 extent = Vec3::Ones();
  Index3 n{2, 2, 2};
  std::array<VectorX, 3> nodes;    // physical coordinates per axis
  std::array<VectorX, 3> weights;  // scaled by extent / 2
  std::array<MatrixX, 3> diff;     // scaled by 2 / extent
  VectorX weights3d;               // x-fastest tensor product

  LGLGrid() = default;
  LGLGrid(const Vec3& lo, const Vec3& extent, const Index3& n);

  Eigen::Index size() const { return static_cast<Eigen::Index>(product(n)); }
  Eigen::Index flat(int i, int j, int k) const {
    return i + static_cast<Eigen::Index>(n[0]) * (j + static_cast<Eigen::Index>(n[1]) * k);
  }
  Vec3 node(int i, int j, int k) const { return {nodes[0][i], nodes[1][j], nodes[2][k]}; }
  // Sample f(x) at every node.
  template <typename F>
  VectorX sample(F&& f) const {
    VectorX v(size());
    for (int k = 0; k < n[2]; ++k)
      for (int j = 0; j < n[1]; ++j)
        for (int i = 0; i < n[0]; ++i) v[flat(i, j, k)] = f(node(i, j, k));
    return v;
  }
};

// Real field on the global (or any) uniform grid.
struct ScalarField {
  UniformGrid grid;
  VectorX values;

  ScalarField() = default;
  ScalarField(const UniformGrid& g, VectorX v);
  explicit ScalarField(const UniformGrid& g) : grid(g), values(VectorX::Zero(g.size())) {}

  double integral() const { return values.sum() * grid.cell_volume(); }
  double dot(const ScalarField& other) const {
    return values.dot(other.values) * grid.cell_volume();
  }
  double l2_norm() const { return std::sqrt(dot(*this)); }
  template <typename F>
  static ScalarField sample(const UniformGrid& g, F&& f) {
    ScalarField s(g);
    for (int k = 0; k < g.n[2]; ++k)
      for (int j = 0; j < g.n[1]; ++j)
        for (int i = 0; i < g.n[0]; ++i) s.values[g.flat(i, j, k)] = f(g.node(i, j, k));
    return s;
  }
};

// Apply a 1D operator along each axis of x-fastest tensor data. Each column of
// `values` is one field with dims `n`; ops[a] is (m_a x n_a), or empty for the
// identity along that axis. Returns one column per input column.
MatrixX apply_separable(const MatrixX& values, const Index3& n,
                        const std::array<std::optional<MatrixX>, 3>& ops);

// Trigonometric interpolation matrix (m x n) for a periodic uniform axis with
// the balanced Nyquist convention; `derivative` gives d/dx of the interpolant.
MatrixX fourier_matrix_1d(int n, double lo, double length, const VectorX& points,
                          bool derivative = false);

// Copy the global field onto the extended element's grid (wrapped).
VectorX restrict_to_extended(const UniformGrid& global, const VectorX& values,
                             const ExtendedElement& q);

// Evaluate the trigonometric interpolant of each column (a field on `src`) at
// the tensor points; performed one axis at a time.
MatrixX fourier_interpolate(const UniformGrid& src, const MatrixX& values,
                            const std::array<VectorX, 3>& points);
inline MatrixX fourier_interpolate(const UniformGrid& src, const MatrixX& values,
                                   const LGLGrid& dst) {
  return fourier_interpolate(src, values, dst.nodes);
}
// Gradient of the trigonometric interpolant at the tensor points.
std::array<MatrixX, 3> fourier_interpolate_gradient(const UniformGrid& src, const MatrixX& values,
                                                    const std::array<VectorX, 3>& points);

std::array<MatrixX, 3> lgl_gradient(const LGLGrid& grid, const MatrixX& values);

// Uniform nodes of the global grid lying in one closed element box, with the
// per-axis Lagrange matrices from the element's LGL nodes.
struct ElementUniformMap {
  std::array<std::vector<int>, 3> global_index;  // wrapped global node index
  std::array<MatrixX, 3> lagrange;               // (m_a x n_lgl_a)
  Index3 m{0, 0, 0};

  // Values at the element's uniform nodes (x-fastest over m), per column.
  MatrixX interpolate(const LGLGrid& grid, const MatrixX& values) const;
};

ElementUniformMap element_uniform_map(const LGLGrid& grid, const UniformGrid& global);

// Accumulate per-element values given at each element's uniform nodes; nodes
// shared by several element boxes receive the arithmetic mean.
ScalarField average_to_uniform(const UniformGrid& global, const std::vector<ElementUniformMap>& maps,
                               const std::vector<VectorX>& element_values);

ScalarField lgl_to_uniform(const std::vector<LGLGrid>& grids, const std::vector<VectorX>& fields,
                           const UniformGrid& global);

struct FaceTrace {
  MatrixX values;   // (face nodes x columns)
  VectorX weights;  // tensor product of the tangential weights
  std::array<int, 2> tangential{0, 1};
};

// Node indices of the face (x-fastest over the two tangential axes).
std::vector<Eigen::Index> face_nodes(const LGLGrid& grid, int axis, Side side);
FaceTrace face_trace(const LGLGrid& grid, const MatrixX& values, int axis, Side side);

}  // namespace dgks
