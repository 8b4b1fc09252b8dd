#include "dgks/basis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace dgks {

SpectralHamiltonian local_hamiltonian(const ExtendedElement& q, const ScalarField& v_eff,
                                      const KohnShamModel& model) {
  VectorX v = restrict_to_extended(model.grid, v_eff.values, q);
  auto inside = [&](int a) { return q.contains(model.atoms[static_cast<std::size_t>(a)].position, model.domain); };
  return SpectralHamiltonian(q.grid, std::move(v),
                             sparse_projectors(model.atoms, model.domain, model.grid, q.grid, inside));
}

LocalBasisSet svd_filter(const RawBasis& raw, const LGLGrid& grid, double threshold) {
  if (threshold < 0.0) throw std::invalid_argument("SVD threshold must be nonnegative");
  const VectorX sqrt_w = grid.weights3d.cwiseSqrt();
  const MatrixX m = sqrt_w.asDiagonal() * raw.values;
  Eigen::BDCSVD<MatrixX> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorX& s = svd.singularValues();
  Eigen::Index kept = 0;
  while (kept < s.size() && s[kept] > threshold) ++kept;
  if (kept == 0) throw ConfigError("SVD filtering removed every basis function (dg.svd_threshold too large)");

  LocalBasisSet b;
  b.singular_values = s;
  b.local_eigenvalues = raw.local_eigenvalues;
  b.values = sqrt_w.cwiseInverse().asDiagonal() * svd.matrixU().leftCols(kept);
  const MatrixX t = svd.matrixV().leftCols(kept) * s.head(kept).cwiseInverse().asDiagonal();
  for (int d = 0; d < 3; ++d) b.gradients[d] = raw.gradients[d] * t;
  attach_face_traces(b, grid);
  return b;
}

void attach_face_traces(LocalBasisSet& basis, const LGLGrid& grid) {
  for (int a = 0; a < 3; ++a) {
    for (Side side : {Side::Lower, Side::Upper}) {
      const std::vector<Eigen::Index> idx = face_nodes(grid, a, side);
      const int slot = face_slot(a, side);
      const Eigen::Index nf = static_cast<Eigen::Index>(idx.size());
      basis.face_values[slot].resize(nf, basis.values.cols());
      basis.face_normal_derivatives[slot].resize(nf, basis.values.cols());
      for (Eigen::Index r = 0; r < nf; ++r) {
        basis.face_values[slot].row(r) = basis.values.row(idx[static_cast<std::size_t>(r)]);
        basis.face_normal_derivatives[slot].row(r) = basis.gradients[a].row(idx[static_cast<std::size_t>(r)]);
      }
    }
  }
}

double gram_deviation(const LocalBasisSet& basis, const LGLGrid& grid) {
  const MatrixX g = basis.values.transpose() * grid.weights3d.asDiagonal() * basis.values;
  return (g - MatrixX::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

BasisGenerator::BasisGenerator(const KohnShamModel& model, const Partition& partition, int element,
                               const Vec3& buffer, const LGLGrid& grid, BasisOptions options)
    : model_(model), options_(options) {
  if (options_.count < 1) throw ConfigError("basis count per element must be >= 1");
  q_ = extended_element(partition, model.grid, element, buffer);
  const int extra = options_.extra_states >= 0 ? options_.extra_states : std::max(2, options_.count / 10);
  states_ = options_.count + extra;
  if (states_ > q_.grid.size()) throw ConfigError("more local states requested than extended-element grid points");
  lgl_n_ = grid.n;
  for (int a = 0; a < 3; ++a) {
    to_lgl_[a] = fourier_matrix_1d(q_.grid.n[a], q_.grid.lo[a], q_.grid.extent[a], grid.nodes[a]);
    to_lgl_derivative_[a] = fourier_matrix_1d(q_.grid.n[a], q_.grid.lo[a], q_.grid.extent[a], grid.nodes[a], true);
  }
  auto inside = [&](int a) { return q_.contains(model.atoms[static_cast<std::size_t>(a)].position, model.domain); };
  projectors_ = sparse_projectors(model.atoms, model.domain, model.grid, q_.grid, inside);
  x_ = random_block(q_.grid.size(), states_, options_.seed + 7919ULL * static_cast<std::uint64_t>(element));
}

RawBasis BasisGenerator::generate(const ScalarField& v_eff, bool converge) {
  const SpectralHamiltonian h(q_.grid, restrict_to_extended(model_.grid, v_eff.values, q_), projectors_);
  LobpcgOptions opt;
  opt.tolerance = options_.tolerance;
  opt.max_iterations = converge ? options_.converge_max_iterations : options_.inner_iterations;
  last_ = lobpcg_solve(h, x_, opt);
  x_ = last_.orbitals;

  const MatrixX phi = last_.orbitals.leftCols(options_.count);
  RawBasis raw;
  raw.local_eigenvalues = last_.eigenvalues.head(options_.count);
  raw.values = apply_separable(phi, q_.grid.n, {to_lgl_[0], to_lgl_[1], to_lgl_[2]});
  raw.gradients[0] = apply_separable(phi, q_.grid.n, {to_lgl_derivative_[0], to_lgl_[1], to_lgl_[2]});
  raw.gradients[1] = apply_separable(phi, q_.grid.n, {to_lgl_[0], to_lgl_derivative_[1], to_lgl_[2]});
  raw.gradients[2] = apply_separable(phi, q_.grid.n, {to_lgl_[0], to_lgl_[1], to_lgl_derivative_[2]});
  return raw;
}

}  // namespace dgks
