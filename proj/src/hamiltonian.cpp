#include "dgks/hamiltonian.hpp"

#include <cmath>

namespace dgks {

namespace {

// Gaussian summed over the minimal image and the surrounding shell of images.
double image_sum_gaussian(const Vec3& d0, const Vec3& extents, double width) {
  const double inv = 1.0 / (2.0 * width * width);
  double s = 0.0;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b)
      for (int c = -1; c <= 1; ++c) {
        const Vec3 d = d0 + Vec3(a * extents[0], b * extents[1], c * extents[2]);
        s += std::exp(-d.squaredNorm() * inv);
      }
  return s;
}

}  // namespace

double projector_shape(const ProjectorSpec& p, const Vec3& d) {
  const double r2 = d.squaredNorm();
  if (r2 >= p.cutoff * p.cutoff) return 0.0;
  const double g = std::exp(-r2 / (2.0 * p.width * p.width));
  return p.shape == ProjectorSpec::Shape::S ? g : d[p.axis] * g;
}

ScalarField external_potential(std::span<const AtomSpec> atoms, const Domain& domain,
                               const UniformGrid& grid) {
  ScalarField v(grid);
  for (const AtomSpec& atom : atoms) {
    for (int k = 0; k < grid.n[2]; ++k)
      for (int j = 0; j < grid.n[1]; ++j)
        for (int i = 0; i < grid.n[0]; ++i) {
          const Vec3 d = domain.minimal_image(grid.node(i, j, k) - atom.position);
          v.values[grid.flat(i, j, k)] -= atom.depth * image_sum_gaussian(d, domain.extents, atom.width);
        }
  }
  return v;
}

double projector_normalization(const AtomSpec& atom, const ProjectorSpec& p, const Domain& domain,
                               const UniformGrid& global) {
  if (p.cutoff > 0.5 * domain.extents.minCoeff()) {
    throw ConfigError("projector cutoff exceeds half the domain extent");
  }
  double s = 0.0;
  for (int k = 0; k < global.n[2]; ++k)
    for (int j = 0; j < global.n[1]; ++j)
      for (int i = 0; i < global.n[0]; ++i) {
        const double v = projector_shape(p, domain.minimal_image(global.node(i, j, k) - atom.position));
        s += v * v;
      }
  s *= global.cell_volume();
  if (!(s > 0.0)) throw ConfigError("projector vanishes on the global grid");
  return 1.0 / std::sqrt(s);
}

std::vector<ScalarField> projector_fields(const AtomSpec& atom, const Domain& domain,
                                          const UniformGrid& global) {
  std::vector<ScalarField> out;
  for (const ProjectorSpec& p : atom.projectors) {
    const double norm = projector_normalization(atom, p, domain, global);
    out.push_back(ScalarField::sample(global, [&](const Vec3& x) {
      return norm * projector_shape(p, domain.minimal_image(x - atom.position));
    }));
  }
  return out;
}

std::vector<SparseProjector> sparse_projectors(std::span<const AtomSpec> atoms, const Domain& domain,
                                               const UniformGrid& global, const UniformGrid& grid) {
  return sparse_projectors(atoms, domain, global, grid, [](int) { return true; });
}

ScalarField hartree_potential(const ScalarField& rho) {
  const UniformGrid& g = rho.grid;
  VectorX mult = wavenumber_squared(g);
  for (Eigen::Index i = 0; i < mult.size(); ++i) mult[i] = (i == 0) ? 0.0 : 4.0 * kPi / mult[i];
  Fft3d fft(g.n);
  MatrixX v = apply_multiplier(fft, mult, rho.values);
  return ScalarField(g, v.col(0));
}

void lda_exchange(double rho, double& eps_x, double& v_x) {
  if (rho <= 1e-30) {
    eps_x = v_x = 0.0;
    return;
  }
  eps_x = -0.75 * std::cbrt(3.0 / kPi) * std::cbrt(rho);
  v_x = 4.0 / 3.0 * eps_x;
}

void pz_correlation(double rho, double& eps_c, double& v_c) {
  if (rho <= 1e-30) {
    eps_c = v_c = 0.0;
    return;
  }
  const double rs = std::cbrt(3.0 / (4.0 * kPi * rho));
  if (rs >= 1.0) {
    constexpr double gamma = -0.1423, beta1 = 1.0529, beta2 = 0.3334;
    const double srs = std::sqrt(rs);
    const double den = 1.0 + beta1 * srs + beta2 * rs;
    eps_c = gamma / den;
    v_c = eps_c * (1.0 + 7.0 / 6.0 * beta1 * srs + 4.0 / 3.0 * beta2 * rs) / den;
  } else {
    constexpr double a = 0.0311, b = -0.048, c = 0.0020, d = -0.0116;
    const double lrs = std::log(rs);
    eps_c = a * lrs + b + c * rs * lrs + d * rs;
    v_c = a * lrs + (b - a / 3.0) + 2.0 / 3.0 * c * rs * lrs + (2.0 * d - c) / 3.0 * rs;
  }
}

void pz_lda(double rho, double& eps_xc, double& v_xc) {
  double ex, vx, ec, vc;
  lda_exchange(rho, ex, vx);
  pz_correlation(rho, ec, vc);
  eps_xc = ex + ec;
  v_xc = vx + vc;
}

XcResult xc_lda(const ScalarField& rho) {
  XcResult r;
  const Eigen::Index n = rho.values.size();
  r.energy_density.resize(n);
  r.potential.resize(n);
  const double dv = rho.grid.cell_volume();
  for (Eigen::Index i = 0; i < n; ++i) {
    double value = rho.values[i];
    if (value < 0.0) {
      r.clamped_charge -= value * dv;
      value = 0.0;
    }
    pz_lda(value, r.energy_density[i], r.potential[i]);
    r.energy += r.energy_density[i] * value * dv;
    r.double_count += r.potential[i] * value * dv;
  }
  return r;
}

EffectivePotential effective_potential(const ScalarField& rho, const ScalarField& v_ext,
                                       const HamiltonianOptions& options) {
  EffectivePotential v;
  v.external = v_ext;
  v.hartree = options.hartree ? hartree_potential(rho) : ScalarField(rho.grid);
  if (options.xc) {
    XcResult xc = xc_lda(rho);
    v.xc = ScalarField(rho.grid, std::move(xc.potential));
    v.clamped_charge = xc.clamped_charge;
  } else {
    v.xc = ScalarField(rho.grid);
  }
  v.total = ScalarField(rho.grid, v.external.values + v.hartree.values + v.xc.values);
  return v;
}

EffectivePotential effective_potential(const ScalarField& rho, std::span<const AtomSpec> atoms,
                                       const Domain& domain, const HamiltonianOptions& options) {
  return effective_potential(rho, external_potential(atoms, domain, rho.grid), options);
}

EnergyReport total_energy(const VectorX& eigenvalues, const VectorX& occupations,
                          const ScalarField& rho, double n_electrons,
                          const HamiltonianOptions& options) {
  if (eigenvalues.size() != occupations.size()) {
    throw std::invalid_argument("eigenvalue and occupation counts differ");
  }
  if (std::abs(occupations.sum() - n_electrons) > 1e-8) {
    throw std::invalid_argument("occupations do not sum to the electron count");
  }
  EnergyReport e;
  e.eigenvalue_sum = occupations.dot(eigenvalues);
  if (options.hartree) e.hartree_double_count = 0.5 * hartree_potential(rho).dot(rho);
  if (options.xc) {
    const XcResult xc = xc_lda(rho);
    e.xc_energy = xc.energy;
    e.xc_double_count = xc.double_count;
  }
  e.total = e.recompute_total();
  return e;
}

ScalarField atomic_density_guess(std::span<const AtomSpec> atoms, const Domain& domain,
                                 const UniformGrid& grid) {
  ScalarField rho(grid);
  for (const AtomSpec& atom : atoms) {
    const double w = atom.width;
    ScalarField g = ScalarField::sample(grid, [&](const Vec3& x) {
      return image_sum_gaussian(domain.minimal_image(x - atom.position), domain.extents, w);
    });
    const double total = g.integral();
    rho.values += (atom.valence / total) * g.values;
  }
  return rho;
}

double total_valence(std::span<const AtomSpec> atoms) {
  double n = 0.0;
  for (const AtomSpec& a : atoms) n += a.valence;
  return n;
}

}  // namespace dgks

namespace dgks {

KohnShamModel::KohnShamModel(const Domain& domain_, const UniformGrid& grid_,
                             std::vector<AtomSpec> atoms_, HamiltonianOptions options_)
    : domain(domain_), grid(grid_), atoms(std::move(atoms_)), options(options_) {
  for (AtomSpec& a : atoms) a.position = domain.wrap(a.position);
  v_ext = external_potential(atoms, domain, grid);
  n_electrons = total_valence(atoms);
}

}  // namespace dgks
