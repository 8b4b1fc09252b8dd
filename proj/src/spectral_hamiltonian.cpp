#include "dgks/spectral_hamiltonian.hpp"

#include <algorithm>

namespace dgks {

SpectralHamiltonian::SpectralHamiltonian(const UniformGrid& grid, VectorX v_local,
                                         std::vector<SparseProjector> projectors)
    : grid_(grid),
      v_local_(std::move(v_local)),
      projectors_(std::move(projectors)),
      half_k2_(0.5 * wavenumber_squared(grid)),
      fft_(grid.n),
      dv_(grid.cell_volume()) {
  if (v_local_.size() != grid_.size()) throw std::invalid_argument("local potential size mismatch");
}

MatrixX SpectralHamiltonian::apply_kinetic(const MatrixX& psi) const {
  return apply_multiplier(fft_, half_k2_, psi);
}

MatrixX SpectralHamiltonian::apply_nonlocal(const MatrixX& psi) const {
  MatrixX out = MatrixX::Zero(psi.rows(), psi.cols());
  for (const SparseProjector& p : projectors_) {
    const Eigen::Index m = static_cast<Eigen::Index>(p.support.size());
    if (m == 0) continue;
    Eigen::RowVectorXd overlap = Eigen::RowVectorXd::Zero(psi.cols());
    for (Eigen::Index s = 0; s < m; ++s) overlap += p.values[s] * psi.row(p.support[s]);
    overlap *= p.coefficient * dv_;
    for (Eigen::Index s = 0; s < m; ++s) out.row(p.support[s]) += p.values[s] * overlap;
  }
  return out;
}

MatrixX SpectralHamiltonian::apply(const MatrixX& psi) const {
  MatrixX out = apply_kinetic(psi);
  out += v_local_.asDiagonal() * psi;
  if (!projectors_.empty()) out += apply_nonlocal(psi);
  return out;
}

VectorX SpectralHamiltonian::kinetic_energies(const MatrixX& x, const MatrixX& hx) const {
  VectorX t(x.cols());
  const MatrixX nl = projectors_.empty() ? MatrixX() : apply_nonlocal(x);
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double norm2 = x.col(c).squaredNorm();
    double e = x.col(c).dot(hx.col(c)) - x.col(c).cwiseAbs2().dot(v_local_);
    if (!projectors_.empty()) e -= x.col(c).dot(nl.col(c));
    t[c] = e / norm2;
  }
  return t;
}

MatrixX SpectralHamiltonian::precondition(const MatrixX& residual, const VectorX& kinetic_scale) const {
  MatrixX out(residual.rows(), residual.cols());
  VectorX mult(half_k2_.size());
  for (Eigen::Index c = 0; c < residual.cols(); ++c) {
    const double scale = std::max(kinetic_scale[c], 1e-2);
    for (Eigen::Index i = 0; i < mult.size(); ++i) mult[i] = tpa_filter(half_k2_[i] / scale);
    out.col(c) = apply_multiplier(fft_, mult, residual.col(c));
  }
  return out;
}

}  // namespace dgks
