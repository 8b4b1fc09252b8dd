#pragma once

#include <span>
#include <vector>

#include "dgks/fft.hpp"
#include "dgks/geometry.hpp"
#include "dgks/grids.hpp"

namespace dgks {

// Gaussian-type separable projector b(r) centred on an atom. The nonlocal
// operator is sign * coupling * |b><b| with b normalized on the global grid.
struct ProjectorSpec {
  enum class Shape { S, P };
  Shape shape = Shape::S;
  int axis = 2;  // orientation of a p-like projector
  int sign = +1;
  double coupling = 1.0;
  double width = 0.5;
  double cutoff = 4.0;  // b == 0 beyond this radius

  double coefficient() const { return sign * coupling; }
};

// Model pseudo-atom: local Gaussian well -depth * exp(-r^2 / 2 width^2) plus
// Kleinman-Bylander style projectors.
struct AtomSpec {
  Vec3 position = Vec3::Zero();
  double depth = 1.0;
  double width = 1.0;
  double valence = 1.0;
  std::vector<ProjectorSpec> projectors;
};

// Unnormalized projector value at minimal-image displacement d.
double projector_shape(const ProjectorSpec& p, const Vec3& d);

// Sum of Gaussian wells over the minimal image plus one shell of images.
ScalarField external_potential(std::span<const AtomSpec> atoms, const Domain& domain,
                               const UniformGrid& grid);

// 1 / ||b||, computed on the global grid.
double projector_normalization(const AtomSpec& atom, const ProjectorSpec& p, const Domain& domain,
                               const UniformGrid& global);

// Normalized projector fields of one atom on the global grid.
std::vector<ScalarField> projector_fields(const AtomSpec& atom, const Domain& domain,
                                          const UniformGrid& global);

// Projector restricted to the nodes of some uniform grid where it is nonzero.
struct SparseProjector {
  int atom = 0;
  double coefficient = 0.0;  // sign * coupling
  std::vector<Eigen::Index> support;
  VectorX values;
};

// Sample every projector of `atoms` on `grid` (global or an extended-element
// grid), normalized with respect to `global`. Atoms for which `include`
// returns false are skipped.
template <typename Pred>
std::vector<SparseProjector> sparse_projectors(std::span<const AtomSpec> atoms, const Domain& domain,
                                               const UniformGrid& global, const UniformGrid& grid,
                                               Pred include);
std::vector<SparseProjector> sparse_projectors(std::span<const AtomSpec> atoms, const Domain& domain,
                                               const UniformGrid& global, const UniformGrid& grid);

// Solves -lap V = 4 pi (rho - mean) spectrally; zero-mean result.
ScalarField hartree_potential(const ScalarField& rho);

struct XcResult {
  VectorX energy_density;  // eps_xc per electron
  VectorX potential;       // d(rho eps_xc)/d rho
  double energy = 0.0;         // int eps_xc rho
  double double_count = 0.0;   // int V_xc rho
  double clamped_charge = 0.0; // int of the negative part removed before evaluation
};

// Slater exchange and Perdew-Zunger correlation (unpolarized), per electron,
// with the corresponding potentials d(rho eps)/d rho.
void lda_exchange(double rho, double& eps_x, double& v_x);
void pz_correlation(double rho, double& eps_c, double& v_c);
void pz_lda(double rho, double& eps_xc, double& v_xc);
XcResult xc_lda(const ScalarField& rho);

struct HamiltonianOptions {
  bool hartree = true;
  bool xc = true;
};

struct EffectivePotential {
  ScalarField total;
  ScalarField external;
  ScalarField hartree;
  ScalarField xc;
  double clamped_charge = 0.0;
};

EffectivePotential effective_potential(const ScalarField& rho, const ScalarField& v_ext,
                                       const HamiltonianOptions& options = {});
EffectivePotential effective_potential(const ScalarField& rho, std::span<const AtomSpec> atoms,
                                       const Domain& domain, const HamiltonianOptions& options = {});

struct EnergyReport {
  double eigenvalue_sum = 0.0;
  double hartree_double_count = 0.0;  // 1/2 int V_H rho
  double xc_energy = 0.0;
  double xc_double_count = 0.0;       // int V_xc rho
  double total = 0.0;

  double recompute_total() const {
    return eigenvalue_sum - hartree_double_count + xc_energy - xc_double_count;
  }
};

EnergyReport total_energy(const VectorX& eigenvalues, const VectorX& occupations,
                          const ScalarField& rho, double n_electrons,
                          const HamiltonianOptions& options = {});

// Wrapped superposition of normalized Gaussians carrying each atom's valence.
ScalarField atomic_density_guess(std::span<const AtomSpec> atoms, const Domain& domain,
                                 const UniformGrid& grid);

double total_valence(std::span<const AtomSpec> atoms);

// Everything both solvers share: the periodic box, the global grid, the
// atoms, the fixed external potential and the interaction switches.
struct KohnShamModel {
  Domain domain;
  UniformGrid grid;
  std::vector<AtomSpec> atoms;
  HamiltonianOptions options;
  ScalarField v_ext;
  double n_electrons = 0.0;

  KohnShamModel() = default;
  KohnShamModel(const Domain& domain, const UniformGrid& grid, std::vector<AtomSpec> atoms,
                HamiltonianOptions options = {});

  bool density_dependent() const { return options.hartree || options.xc; }
  EffectivePotential potential(const ScalarField& rho) const {
    return effective_potential(rho, v_ext, options);
  }
};

template <typename Pred>
std::vector<SparseProjector> sparse_projectors(std::span<const AtomSpec> atoms, const Domain& domain,
                                               const UniformGrid& global, const UniformGrid& grid,
                                               Pred include) {
  std::vector<SparseProjector> out;
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    if (!include(static_cast<int>(a))) continue;
    const AtomSpec& atom = atoms[a];
    for (const ProjectorSpec& p : atom.projectors) {
      const double norm = projector_normalization(atom, p, domain, global);
      SparseProjector sp;
      sp.atom = static_cast<int>(a);
      sp.coefficient = p.coefficient();
      std::vector<double> vals;
      for (int k = 0; k < grid.n[2]; ++k)
        for (int j = 0; j < grid.n[1]; ++j)
          for (int i = 0; i < grid.n[0]; ++i) {
            const Vec3 d = domain.minimal_image(grid.node(i, j, k) - atom.position);
            if (d.norm() >= p.cutoff) continue;
            const double v = projector_shape(p, d);
            if (v == 0.0) continue;
            sp.support.push_back(grid.flat(i, j, k));
            vals.push_back(norm * v);
          }
      sp.values = Eigen::Map<const VectorX>(vals.data(), static_cast<Eigen::Index>(vals.size()));
      out.push_back(std::move(sp));
    }
  }
  return out;
}

}  // namespace dgks
