#include <doctest.h>

#include "dgks/hamiltonian.hpp"
#include "dgks/spectral_hamiltonian.hpp"
#include "fixtures.hpp"

using namespace dgks;

namespace {

const Domain kBox(Vec3(6.0, 7.0, 8.0));
const UniformGrid kGrid{Vec3::Zero(), kBox.extents, {12, 14, 16}};

ScalarField random_density(std::uint64_t seed) {
  ScalarField r(kGrid, test::random_matrix(kGrid.size(), 1, seed).col(0).array().abs() + 0.01);
  return r;
}

}  // namespace

TEST_CASE("external potential at an atom centre matches a direct image sum") {
  AtomSpec a = test::model_atom(Vec3(3.0, 3.5, 4.0), 2.0, 0.6);
  const ScalarField v = external_potential(std::span(&a, 1), kBox, kGrid);
  const Eigen::Index c = kGrid.flat(6, 7, 8);
  double images = 0.0;
  for (int i = -3; i <= 3; ++i)
    for (int j = -3; j <= 3; ++j)
      for (int k = -3; k <= 3; ++k) {
        const Vec3 d(6.0 * i, 7.0 * j, 8.0 * k);
        images += std::exp(-d.squaredNorm() / (2 * 0.36));
      }
  CHECK(std::abs(v.values[c] + 2.0 * images) < 1e-12);
  CHECK(std::abs(v.values[c] + 2.0) < 1e-12);
}

TEST_CASE("external potential: periodicity and superposition") {
  std::vector<AtomSpec> two{test::model_atom(Vec3(1.0, 2.0, 3.0)), test::model_atom(Vec3(4.5, 0.2, 7.1), 1.5)};
  const ScalarField both = external_potential(two, kBox, kGrid);
  const ScalarField a = external_potential(std::span(&two[0], 1), kBox, kGrid);
  const ScalarField b = external_potential(std::span(&two[1], 1), kBox, kGrid);
  CHECK((both.values - a.values - b.values).cwiseAbs().maxCoeff() < 1e-14);
  auto shifted = two;
  for (auto& x : shifted) x.position += Vec3(6.0, -7.0, 16.0);
  CHECK((external_potential(shifted, kBox, kGrid).values - both.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projector truncation, normalization and parity") {
  ProjectorSpec s;
  s.width = 0.5;
  s.cutoff = 2.5;
  CHECK(projector_shape(s, Vec3::Zero()) == 1.0);
  CHECK(projector_shape(s, Vec3(0, 0, 2.5)) == 0.0);
  CHECK(projector_shape(s, Vec3(0, 0, 2.4)) > 0.0);

  AtomSpec a = test::model_atom(Vec3(2.1, 3.3, 4.4));
  ProjectorSpec p = s;
  p.shape = ProjectorSpec::Shape::P;
  p.axis = 1;
  a.projectors = {s, p};
  for (const ScalarField& f : projector_fields(a, kBox, kGrid)) CHECK(std::abs(f.dot(f) - 1.0) < 1e-12);
  const Vec3 d(0.3, -0.7, 0.2);
  CHECK(projector_shape(p, d) == doctest::Approx(-projector_shape(p, -d)).epsilon(1e-15));

  AtomSpec wide = a;
  wide.projectors[0].cutoff = 3.5;
  CHECK_THROWS_AS(projector_normalization(wide, wide.projectors[0], kBox, kGrid), ConfigError);
}

TEST_CASE("Hartree potential of uniform and single-mode densities") {
  const ScalarField u(kGrid, VectorX::Constant(kGrid.size(), 0.3));
  CHECK(hartree_potential(u).values.cwiseAbs().maxCoeff() < 1e-12);
  const double lz = kBox.extents[2];
  const ScalarField rho = ScalarField::sample(kGrid, [&](const Vec3& x) { return std::cos(2 * kPi * x[2] / lz); });
  const ScalarField v = hartree_potential(rho);
  CHECK((v.values - lz * lz / kPi * rho.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Hartree operator is linear and self-adjoint") {
  const ScalarField r1 = random_density(1), r2 = random_density(2);
  const ScalarField v1 = hartree_potential(r1), v2 = hartree_potential(r2);
  const ScalarField sum(kGrid, 2.0 * r1.values - 3.0 * r2.values);
  CHECK((hartree_potential(sum).values - (2.0 * v1.values - 3.0 * v2.values)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(v1.dot(r2) - v2.dot(r1)) < 1e-10 * std::abs(v1.dot(r2)));
}

TEST_CASE("LDA exchange closed form and zero density") {
  double ex, vx;
  lda_exchange(1.0, ex, vx);
  CHECK(ex == doctest::Approx(-0.75 * std::cbrt(3.0 / kPi)).epsilon(1e-15));
  CHECK(ex == doctest::Approx(-0.73856).epsilon(1e-5));
  const XcResult z = xc_lda(ScalarField(kGrid));
  CHECK(z.energy == 0.0);
  CHECK(z.double_count == 0.0);
  CHECK(z.potential.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("correlation branches meet at rs = 1") {
  const double rho1 = 3.0 / (4.0 * kPi);
  double e_lo, v_lo, e_hi, v_hi;
  pz_correlation(rho1 * (1 + 1e-9), e_lo, v_lo);
  pz_correlation(rho1 * (1 - 1e-9), e_hi, v_hi);
  CHECK(std::abs(e_lo - e_hi) < 1e-4);
  CHECK(std::abs(v_lo - v_hi) < 1e-3);
}

TEST_CASE("V_xc is the derivative of rho eps_xc") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-6.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const double rho = std::pow(10.0, u(rng));
    const double h = 1e-5 * rho;
    double ep, em, e0, v, dummy;
    pz_lda(rho + h, ep, dummy);
    pz_lda(rho - h, em, dummy);
    pz_lda(rho, e0, v);
    const double fd = ((rho + h) * ep - (rho - h) * em) / (2 * h);
    CHECK(std::abs(fd - v) <= 1e-6 * std::abs(v));
  }
}

TEST_CASE("negative density is clamped and reported") {
  ScalarField r(kGrid, VectorX::Constant(kGrid.size(), 0.01));
  r.values[3] = -0.02;
  const XcResult x = xc_lda(r);
  CHECK(x.clamped_charge == doctest::Approx(0.02 * kGrid.cell_volume()));
  CHECK(x.potential[3] == 0.0);
}

TEST_CASE("effective potential components") {
  std::vector<AtomSpec> atoms{test::model_atom(Vec3(1.0, 2.0, 3.0))};
  const ScalarField zero(kGrid);
  const EffectivePotential v0 = effective_potential(zero, atoms, kBox);
  CHECK((v0.total.values - v0.external.values).cwiseAbs().maxCoeff() == 0.0);

  const ScalarField rho = random_density(4);
  const EffectivePotential v = effective_potential(rho, atoms, kBox);
  CHECK((v.total.values - (v.external.values + v.hartree.values + v.xc.values)).cwiseAbs().maxCoeff() < 1e-14);

  auto wide = atoms;
  wide[0].width *= 2.0;
  const EffectivePotential w = effective_potential(rho, wide, kBox);
  CHECK((w.hartree.values - v.hartree.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK((w.xc.values - v.xc.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK((w.external.values - v.external.values).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("effective potential is invariant under a rigid grid translation") {
  std::vector<AtomSpec> atoms{test::model_atom(Vec3(1.0, 2.0, 3.0)), test::model_atom(Vec3(4.0, 5.0, 6.5))};
  const ScalarField rho = atomic_density_guess(atoms, kBox, kGrid);
  const EffectivePotential v = effective_potential(rho, atoms, kBox);
  // Shift everything by 3 grid steps along y.
  const int s = 3;
  auto moved = atoms;
  for (auto& a : moved) a.position[1] += s * kGrid.spacing(1);
  ScalarField rho_s(kGrid);
  for (int k = 0; k < kGrid.n[2]; ++k)
    for (int j = 0; j < kGrid.n[1]; ++j)
      for (int i = 0; i < kGrid.n[0]; ++i)
        rho_s.values[kGrid.flat(i, (j + s) % kGrid.n[1], k)] = rho.values[kGrid.flat(i, j, k)];
  const EffectivePotential vs = effective_potential(rho_s, moved, kBox);
  double diff = 0.0;
  for (int k = 0; k < kGrid.n[2]; ++k)
    for (int j = 0; j < kGrid.n[1]; ++j)
      for (int i = 0; i < kGrid.n[0]; ++i)
        diff = std::max(diff, std::abs(vs.total.values[kGrid.flat(i, (j + s) % kGrid.n[1], k)] -
                                       v.total.values[kGrid.flat(i, j, k)]));
  CHECK(diff < 1e-10);
}

TEST_CASE("total energy limits") {
  const VectorX eigs = (VectorX(3) << -0.5, -0.2, 0.1).finished();
  const VectorX occ = (VectorX(3) << 1.0, 0.7, 0.3).finished();
  const ScalarField rho = random_density(6);
  const EnergyReport e = total_energy(eigs, occ, rho, 2.0, {false, false});
  CHECK(e.total == doctest::Approx(eigs.dot(occ)).epsilon(1e-15));

  const EnergyReport f = total_energy(eigs, occ, rho, 2.0);
  CHECK(f.total == f.recompute_total());
  const EnergyReport zero = total_energy(eigs, VectorX::Zero(3), ScalarField(kGrid), 0.0);
  CHECK(zero.total == 0.0);
  CHECK_THROWS(total_energy(eigs, occ, rho, 3.0));
}

TEST_CASE("atomic guess carries the valence charge") {
  std::vector<AtomSpec> atoms{test::model_atom(Vec3(1.0, 2.0, 3.0)), test::model_atom(Vec3(5.9, 6.9, 7.9))};
  CHECK(atomic_density_guess(atoms, kBox, kGrid).integral() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(total_valence(atoms) == 2.0);
}

TEST_CASE("planewave is an eigenfunction of the free Hamiltonian") {
  const SpectralHamiltonian h(kGrid, VectorX::Zero(kGrid.size()), {});
  const Vec3 k(2 * kPi / 6.0, 2 * 2 * kPi / 7.0, -3 * 2 * kPi / 8.0);
  const ScalarField psi = ScalarField::sample(kGrid, [&](const Vec3& x) { return std::cos(k.dot(x)); });
  const MatrixX hpsi = h.apply(psi.values);
  CHECK((hpsi.col(0) - 0.5 * k.squaredNorm() * psi.values).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("Hamiltonian is symmetric and shifts with a constant potential") {
  std::vector<AtomSpec> atoms{test::model_atom(Vec3(1.0, 2.0, 3.0)), test::model_atom(Vec3(4.0, 5.0, 6.5))};
  atoms[1].projectors[0].sign = -1;
  for (auto& a : atoms) a.projectors[0].cutoff = 2.5;
  const ScalarField v = external_potential(atoms, kBox, kGrid);
  const SpectralHamiltonian h(kGrid, v.values, sparse_projectors(atoms, kBox, kGrid, kGrid));
  const MatrixX x = test::random_matrix(kGrid.size(), 20, 8);
  const MatrixX y = test::random_matrix(kGrid.size(), 20, 9);
  const MatrixX hx = h.apply(x), hy = h.apply(y);
  for (int i = 0; i < 20; ++i) {
    const double a = y.col(i).dot(hx.col(i)), b = x.col(i).dot(hy.col(i));
    CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a)));
  }
  const SpectralHamiltonian h1(kGrid, (v.values.array() + 1.0).matrix(), sparse_projectors(atoms, kBox, kGrid, kGrid));
  const VectorX u = x.col(0).normalized();
  CHECK(u.dot(h1.apply(u).col(0)) - u.dot(h.apply(u).col(0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Teter-Payne-Allan filter") {
  CHECK(tpa_filter(0.0) == 1.0);
  double last = 1.0;
  for (int i = 1; i <= 1000; ++i) {
    const double k = tpa_filter(0.1 * i);
    CHECK(k < last);
    last = k;
  }
  CHECK(tpa_filter(1e4) * 2e4 == doctest::Approx(1.0).epsilon(0.01));
}
