#include "dgks/reference_solver.hpp"

#include <chrono>
#include <cmath>

namespace dgks {

EigenSolution lobpcg_solve(const SpectralHamiltonian& h, const MatrixX& x0, const LobpcgOptions& options) {
  auto apply = [&](const MatrixX& x) { return h.apply(x); };
  auto precond = [&](const MatrixX& r, const MatrixX& x, const MatrixX& ax) {
    return h.precondition(r, h.kinetic_energies(x, ax));
  };
  LobpcgResult r = lobpcg(apply, precond, x0, options);
  EigenSolution s;
  s.eigenvalues = std::move(r.eigenvalues);
  s.orbitals = r.vectors / std::sqrt(h.grid().cell_volume());
  s.residual_norms = std::move(r.residual_norms);
  s.iterations = r.iterations;
  s.converged = r.converged;
  s.ritz_history = std::move(r.ritz_history);
  return s;
}

GlobalEigenStep::GlobalEigenStep(const KohnShamModel& model, GlobalSolverOptions options)
    : model_(model), options_(options) {
  projectors_ = sparse_projectors(model_.atoms, model_.domain, model_.grid, model_.grid);
  x_ = random_block(model_.grid.size(), options_.n_states, options_.seed);
}

SpectralHamiltonian GlobalEigenStep::hamiltonian(const EffectivePotential& v_eff) const {
  return SpectralHamiltonian(model_.grid, v_eff.total.values, projectors_);
}

VectorX GlobalEigenStep::solve(const EffectivePotential& v_eff, bool converge) {
  const auto t0 = std::chrono::steady_clock::now();
  const SpectralHamiltonian h = hamiltonian(v_eff);
  LobpcgOptions opt;
  opt.tolerance = options_.tolerance;
  opt.max_iterations = converge ? options_.converge_max_iterations : options_.inner_iterations;
  solution_ = lobpcg_solve(h, x_, opt);
  x_ = solution_.orbitals;
  seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return solution_.eigenvalues;
}

ScalarField GlobalEigenStep::density(const VectorX& occupations) {
  ScalarField rho(model_.grid);
  for (Eigen::Index i = 0; i < occupations.size(); ++i) {
    rho.values += occupations[i] * solution_.orbitals.col(i).cwiseAbs2();
  }
  return rho;
}

}  // namespace dgks
