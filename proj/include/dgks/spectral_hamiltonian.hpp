#pragma once

#include <vector>

#include "dgks/fft.hpp"
#include "dgks/hamiltonian.hpp"

namespace dgks {

// -1/2 lap + V_local + sum_l c_l |b_l><b_l| on a periodic uniform grid, acting
// on columns of nodal values. The operator is symmetric in the plain
// Euclidean inner product of nodal vectors; the grid quadrature weight is
// folded into the nonlocal term.
class SpectralHamiltonian {
 public:
  SpectralHamiltonian(const UniformGrid& grid, VectorX v_local, std::vector<SparseProjector> projectors);

  const UniformGrid& grid() const { return grid_; }
  const VectorX& local_potential() const { return v_local_; }
  const std::vector<SparseProjector>& projectors() const { return projectors_; }
  const VectorX& kinetic_symbol() const { return half_k2_; }

  MatrixX apply(const MatrixX& psi) const;
  MatrixX apply_kinetic(const MatrixX& psi) const;
  MatrixX apply_nonlocal(const MatrixX& psi) const;
  // <x_i, T x_i> recovered from H x_i without extra transforms.
  VectorX kinetic_energies(const MatrixX& x, const MatrixX& hx) const;
  // Teter-Payne-Allan filter applied per column with its own kinetic scale.
  MatrixX precondition(const MatrixX& residual, const VectorX& kinetic_scale) const;

 private:
  UniformGrid grid_;
  VectorX v_local_;
  std::vector<SparseProjector> projectors_;
  VectorX half_k2_;
  Fft3d fft_;
  double dv_;
};

// (27 + 18x + 12x^2 + 8x^3) / (27 + 18x + 12x^2 + 8x^3 + 16x^4)
inline double tpa_filter(double x) {
  if (x > 1e60) return 0.0;
  const double num = 27.0 + x * (18.0 + x * (12.0 + 8.0 * x));
  return num / (num + 16.0 * x * x * x * x);
}

}  // namespace dgks
