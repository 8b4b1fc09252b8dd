#pragma once

#include <cstdint>

#include "dgks/lobpcg.hpp"
#include "dgks/scf.hpp"
#include "dgks/spectral_hamiltonian.hpp"

namespace dgks {

struct EigenSolution {
  VectorX eigenvalues;
  MatrixX orbitals;  // grid-quadrature orthonormal: sum psi_i psi_j dV = delta_ij
  VectorX residual_norms;
  int iterations = 0;
  bool converged = false;
  std::vector<VectorX> ritz_history;
};

// LOBPCG with the Teter-Payne-Allan preconditioner. `x0` holds nodal vectors
// (any normalization); the kinetic scale is recomputed per orbital every
// iteration.
EigenSolution lobpcg_solve(const SpectralHamiltonian& h, const MatrixX& x0, const LobpcgOptions& options);

struct GlobalSolverOptions {
  int n_states = 1;
  int inner_iterations = 10;
  double tolerance = 1e-9;
  int converge_max_iterations = 2000;
  std::uint64_t seed = 1;
};

// Plane-wave eigenstep on the whole periodic domain; keeps its orbitals as the
// warm start for the next SCF iteration.
class GlobalEigenStep : public EigenStep {
 public:
  GlobalEigenStep(const KohnShamModel& model, GlobalSolverOptions options);

  VectorX solve(const EffectivePotential& v_eff, bool converge) override;
  ScalarField density(const VectorX& occupations) override;

  const EigenSolution& solution() const { return solution_; }
  SpectralHamiltonian hamiltonian(const EffectivePotential& v_eff) const;
  double seconds() const { return seconds_; }

 private:
  const KohnShamModel& model_;
  GlobalSolverOptions options_;
  std::vector<SparseProjector> projectors_;
  MatrixX x_;
  EigenSolution solution_;
  double seconds_ = 0.0;
};

}  // namespace dgks
