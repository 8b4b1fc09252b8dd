#pragma once

#include <random>
#include <vector>

#include "dgks/config.hpp"
#include "dgks/hamiltonian.hpp"

namespace dgks::test {

inline constexpr double kNaCell = 7.994;

inline AtomSpec model_atom(const Vec3& x, double depth = 3.5, double width = 1.0) {
  AtomSpec a;
  a.position = x;
  a.depth = depth;
  a.width = width;
  a.valence = 1.0;
  ProjectorSpec p;
  p.coupling = 1.0;
  p.width = 0.5;
  p.cutoff = 3.5;
  a.projectors.push_back(p);
  return a;
}

// Two-atom bcc cell repeated along z, with optional random displacement.
inline std::vector<AtomSpec> chain(int cells, double displacement = 0.0, std::uint64_t seed = 7) {
  const Vec3 cell = Vec3::Constant(kNaCell);
  const std::vector<Vec3> pos =
      generate_supercell(cell, {Vec3(0, 0, 0), Vec3(0.5, 0.5, 0.5)}, {1, 1, cells}, displacement, seed);
  std::vector<AtomSpec> out;
  for (const Vec3& x : pos) out.push_back(model_atom(x));
  return out;
}

inline KohnShamModel chain_model(int cells, int points_per_cell = 20, double displacement = 0.0,
                                 HamiltonianOptions options = {}) {
  const Domain d(Vec3(kNaCell, kNaCell, kNaCell * cells));
  const UniformGrid g{Vec3::Zero(), d.extents, {points_per_cell, points_per_cell, points_per_cell * cells}};
  return KohnShamModel(d, g, chain(cells, displacement), options);
}

inline RunConfig chain_config(int cells) {
  RunConfig c;
  SpeciesConfig na;
  na.name = "Na";
  na.projectors.push_back(model_atom(Vec3::Zero()).projectors.front());
  c.species.push_back(na);
  LatticeConfig l;
  l.cell = Vec3::Constant(kNaCell);
  l.basis = {{"Na", Vec3(0, 0, 0)}, {"Na", Vec3(0.5, 0.5, 0.5)}};
  l.repetitions = {1, 1, cells};
  l.displacement = 0.2;
  l.seed = 7;
  c.lattice = l;
  c.partition = {1, 1, cells};
  return c;
}

inline MatrixX random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MatrixX m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = u(rng);
  return m;
}

}  // namespace dgks::test
