#include "dgks/grids.hpp"

#include <algorithm>
#include <cmath>

namespace dgks {

LGLGrid::LGLGrid(const Vec3& lo_, const Vec3& extent_, const Index3& n_)
    : lo(lo_), extent(extent_), n(n_) {
  for (int a = 0; a < 3; ++a) {
    const Lgl1d<double> rule = lgl_1d<double>(n[a]);
    const double half = 0.5 * extent[a];
    nodes[a] = (lo[a] + half * (rule.nodes.array() + 1.0)).matrix();
    // Pin the endpoints so face traces coincide exactly between neighbours.
    nodes[a][0] = lo[a];
    nodes[a][n[a] - 1] = lo[a] + extent[a];
    weights[a] = half * rule.weights;
    diff[a] = rule.diff / half;
  }
  weights3d.resize(size());
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i)
        weights3d[flat(i, j, k)] = weights[0][i] * weights[1][j] * weights[2][k];
}

ScalarField::ScalarField(const UniformGrid& g, VectorX v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) {
    throw std::invalid_argument("field value count does not match grid node count");
  }
}

MatrixX apply_separable(const MatrixX& values, const Index3& n,
                        const std::array<std::optional<MatrixX>, 3>& ops) {
  Index3 m = n;
  for (int a = 0; a < 3; ++a) {
    if (ops[a]) {
      if (ops[a]->cols() != n[a]) throw std::invalid_argument("separable operator shape mismatch");
      m[a] = static_cast<int>(ops[a]->rows());
    }
  }
  if (values.rows() != product(n)) throw std::invalid_argument("separable input size mismatch");
  MatrixX out(product(m), values.cols());
  MatrixX s1, s2;
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    // Along x: (n0, n1*n2) -> (m0, n1*n2).
    Eigen::Map<const MatrixX> a0(values.col(c).data(), n[0], static_cast<Eigen::Index>(n[1]) * n[2]);
    if (ops[0]) {
      s1.noalias() = *ops[0] * a0;
    } else {
      s1 = a0;
    }
    // Along y: for each z-slab, (m0, n1) -> (m0, m1).
    if (ops[1]) {
      s2.resize(static_cast<Eigen::Index>(m[0]) * m[1], n[2]);
      for (int k = 0; k < n[2]; ++k) {
        Eigen::Map<const MatrixX> slab(s1.data() + static_cast<Eigen::Index>(k) * m[0] * n[1], m[0], n[1]);
        Eigen::Map<MatrixX> dst(s2.data() + static_cast<Eigen::Index>(k) * m[0] * m[1], m[0], m[1]);
        dst.noalias() = slab * ops[1]->transpose();
      }
    } else {
      s2 = Eigen::Map<const MatrixX>(s1.data(), static_cast<Eigen::Index>(m[0]) * m[1], n[2]);
    }
    // Along z: (m0*m1, n2) -> (m0*m1, m2).
    Eigen::Map<MatrixX> dst(out.col(c).data(), static_cast<Eigen::Index>(m[0]) * m[1], m[2]);
    if (ops[2]) {
      dst.noalias() = s2 * ops[2]->transpose();
    } else {
      dst = s2;
    }
  }
  return out;
}

MatrixX fourier_matrix_1d(int n, double lo, double length, const VectorX& points, bool derivative) {
  MatrixX t(points.size(), n);
  const double h = length / n;
  const bool even = (n % 2 == 0);
  const int kmax = even ? n / 2 - 1 : (n - 1) / 2;
  const double scale = 2.0 * kPi / length;
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    for (int j = 0; j < n; ++j) {
      const double theta = scale * (points[i] - (lo + j * h));
      double s = 0.0;
      if (!derivative) {
        s = 1.0;
        for (int k = 1; k <= kmax; ++k) s += 2.0 * std::cos(k * theta);
        if (even) s += std::cos(0.5 * n * theta);
      } else {
        for (int k = 1; k <= kmax; ++k) s -= 2.0 * k * std::sin(k * theta);
        if (even) s -= 0.5 * n * std::sin(0.5 * n * theta);
        s *= scale;
      }
      t(i, j) = s / n;
    }
  }
  return t;
}

VectorX restrict_to_extended(const UniformGrid& global, const VectorX& values,
                             const ExtendedElement& q) {
  const Index3& m = q.grid.n;
  std::array<std::vector<int>, 3> idx;
  for (int a = 0; a < 3; ++a) {
    idx[a].resize(m[a]);
    for (int i = 0; i < m[a]; ++i) idx[a][i] = wrap_index(q.offset[a] + i, global.n[a]);
  }
  VectorX out(q.grid.size());
  for (int k = 0; k < m[2]; ++k)
    for (int j = 0; j < m[1]; ++j)
      for (int i = 0; i < m[0]; ++i)
        out[q.grid.flat(i, j, k)] = values[global.flat(idx[0][i], idx[1][j], idx[2][k])];
  return out;
}

MatrixX fourier_interpolate(const UniformGrid& src, const MatrixX& values,
                            const std::array<VectorX, 3>& points) {
  std::array<std::optional<MatrixX>, 3> ops;
  for (int a = 0; a < 3; ++a) ops[a] = fourier_matrix_1d(src.n[a], src.lo[a], src.extent[a], points[a]);
  return apply_separable(values, src.n, ops);
}

std::array<MatrixX, 3> fourier_interpolate_gradient(const UniformGrid& src, const MatrixX& values,
                                                    const std::array<VectorX, 3>& points) {
  std::array<MatrixX, 3> t, dt;
  for (int a = 0; a < 3; ++a) {
    t[a] = fourier_matrix_1d(src.n[a], src.lo[a], src.extent[a], points[a]);
    dt[a] = fourier_matrix_1d(src.n[a], src.lo[a], src.extent[a], points[a], true);
  }
  std::array<MatrixX, 3> g;
  for (int d = 0; d < 3; ++d) {
    std::array<std::optional<MatrixX>, 3> ops;
    for (int a = 0; a < 3; ++a) ops[a] = (a == d) ? dt[a] : t[a];
    g[d] = apply_separable(values, src.n, ops);
  }
  return g;
}

std::array<MatrixX, 3> lgl_gradient(const LGLGrid& grid, const MatrixX& values) {
  std::array<MatrixX, 3> g;
  for (int d = 0; d < 3; ++d) {
    std::array<std::optional<MatrixX>, 3> ops;
    ops[d] = grid.diff[d];
    g[d] = apply_separable(values, grid.n, ops);
  }
  return g;
}

MatrixX ElementUniformMap::interpolate(const LGLGrid& grid, const MatrixX& values) const {
  std::array<std::optional<MatrixX>, 3> ops{lagrange[0], lagrange[1], lagrange[2]};
  return apply_separable(values, grid.n, ops);
}

ElementUniformMap element_uniform_map(const LGLGrid& grid, const UniformGrid& global) {
  ElementUniformMap map;
  for (int a = 0; a < 3; ++a) {
    const double h = global.spacing(a);
    const double lo = grid.lo[a];
    const double hi = grid.lo[a] + grid.extent[a];
    const double tol = 1e-9 * h;
    const long long first = static_cast<long long>(std::ceil((lo - global.lo[a] - tol) / h));
    const long long last = static_cast<long long>(std::floor((hi - global.lo[a] + tol) / h));
    std::vector<double> pts;
    for (long long i = first; i <= last; ++i) {
      map.global_index[a].push_back(wrap_index(i, global.n[a]));
      pts.push_back(std::clamp(global.lo[a] + i * h, lo, hi));
    }
    map.m[a] = static_cast<int>(pts.size());
    const VectorX p = Eigen::Map<const VectorX>(pts.data(), static_cast<Eigen::Index>(pts.size()));
    map.lagrange[a] = lagrange_matrix(grid.nodes[a], p);
  }
  return map;
}

ScalarField average_to_uniform(const UniformGrid& global, const std::vector<ElementUniformMap>& maps,
                               const std::vector<VectorX>& element_values) {
  VectorX sum = VectorX::Zero(global.size());
  Eigen::VectorXi count = Eigen::VectorXi::Zero(global.size());
  for (std::size_t e = 0; e < maps.size(); ++e) {
    const ElementUniformMap& map = maps[e];
    const VectorX& v = element_values[e];
    Eigen::Index p = 0;
    for (int k = 0; k < map.m[2]; ++k)
      for (int j = 0; j < map.m[1]; ++j)
        for (int i = 0; i < map.m[0]; ++i, ++p) {
          const Eigen::Index g =
              global.flat(map.global_index[0][i], map.global_index[1][j], map.global_index[2][k]);
          sum[g] += v[p];
          count[g] += 1;
        }
  }
  ScalarField out(global);
  for (Eigen::Index g = 0; g < global.size(); ++g) {
    out.values[g] = count[g] > 0 ? sum[g] / count[g] : 0.0;
  }
  return out;
}

ScalarField lgl_to_uniform(const std::vector<LGLGrid>& grids, const std::vector<VectorX>& fields,
                           const UniformGrid& global) {
  std::vector<ElementUniformMap> maps;
  std::vector<VectorX> values;
  maps.reserve(grids.size());
  values.reserve(grids.size());
  for (std::size_t e = 0; e < grids.size(); ++e) {
    maps.push_back(element_uniform_map(grids[e], global));
    values.push_back(maps.back().interpolate(grids[e], fields[e]));
  }
  return average_to_uniform(global, maps, values);
}

std::vector<Eigen::Index> face_nodes(const LGLGrid& grid, int axis, Side side) {
  const int t0 = (axis == 0) ? 1 : 0;
  const int t1 = (axis == 2) ? 1 : 2;
  const int fixed = (side == Side::Lower) ? 0 : grid.n[axis] - 1;
  std::vector<Eigen::Index> idx;
  idx.reserve(static_cast<std::size_t>(grid.n[t0]) * grid.n[t1]);
  for (int b = 0; b < grid.n[t1]; ++b) {
    for (int a = 0; a < grid.n[t0]; ++a) {
      int ijk[3];
      ijk[axis] = fixed;
      ijk[t0] = a;
      ijk[t1] = b;
      idx.push_back(grid.flat(ijk[0], ijk[1], ijk[2]));
    }
  }
  return idx;
}

FaceTrace face_trace(const LGLGrid& grid, const MatrixX& values, int axis, Side side) {
  const int t0 = (axis == 0) ? 1 : 0;
  const int t1 = (axis == 2) ? 1 : 2;
  const std::vector<Eigen::Index> idx = face_nodes(grid, axis, side);
  FaceTrace f;
  f.tangential = {t0, t1};
  f.values.resize(static_cast<Eigen::Index>(idx.size()), values.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) f.values.row(static_cast<Eigen::Index>(r)) = values.row(idx[r]);
  f.weights.resize(static_cast<Eigen::Index>(idx.size()));
  Eigen::Index p = 0;
  for (int b = 0; b < grid.n[t1]; ++b)
    for (int a = 0; a < grid.n[t0]; ++a) f.weights[p++] = grid.weights[t0][a] * grid.weights[t1][b];
  return f;
}

}  // namespace dgks
