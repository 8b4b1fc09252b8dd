#include <doctest.h>

#include <cmath>

#include "dgks/basis.hpp"
#include "fixtures.hpp"

using namespace dgks;

namespace {

LGLGrid small_grid(int n = 6) { return LGLGrid(Vec3(0.5, -1.0, 2.0), Vec3(2.0, 3.0, 1.5), {n, n, n}); }

// Linearly independent polynomial columns (distinct leading monomials of
// degree <= 3 per axis) with their exact gradients.
RawBasis polynomial_raw(const LGLGrid& g, int columns) {
  static const int powers[][3] = {{0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {1, 1, 1}, {0, 0, 3}, {2, 1, 0}, {3, 0, 2}, {1, 3, 1}};
  RawBasis raw;
  raw.values.resize(g.size(), columns);
  for (auto& d : raw.gradients) d.resize(g.size(), columns);
  for (int c = 0; c < columns; ++c) {
    const int* p = powers[c];
    auto mono = [&](const Vec3& x, int skip) {
      double v = 1.0;
      for (int a = 0; a < 3; ++a) {
        if (a == skip) v *= p[a] > 0 ? p[a] * std::pow(x[a], p[a] - 1) : 0.0;
        else v *= std::pow(x[a], p[a]);
      }
      return v;
    };
    // Mix in a common smooth part so the columns are not already orthogonal.
    raw.values.col(c) = g.sample([&](const Vec3& x) { return mono(x, -1) + 0.5 + 0.25 * x[0]; });
    for (int a = 0; a < 3; ++a)
      raw.gradients[a].col(c) = g.sample([&](const Vec3& x) { return mono(x, a) + (a == 0 ? 0.25 : 0.0); });
  }
  raw.local_eigenvalues = VectorX::LinSpaced(columns, -1.0, 0.0);
  return raw;
}

}  // namespace

TEST_CASE("duplicated columns are filtered to a single function") {
  const LGLGrid g = small_grid();
  RawBasis raw = polynomial_raw(g, 1);
  raw.values.conservativeResize(Eigen::NoChange, 2);
  raw.values.col(1) = raw.values.col(0);
  for (auto& d : raw.gradients) {
    d.conservativeResize(Eigen::NoChange, 2);
    d.col(1) = d.col(0);
  }
  const LocalBasisSet b = svd_filter(raw, g, 1e-8);
  CHECK(b.count() == 1);
  CHECK(b.singular_values[1] < 1e-10);
  CHECK(gram_deviation(b, g) < 1e-13);
}

TEST_CASE("orthonormal input keeps every function with unit singular values") {
  const LGLGrid g = small_grid();
  const MatrixX q = MatrixX(test::random_matrix(g.size(), 5, 11).householderQr().householderQ()).leftCols(5);
  RawBasis raw;
  raw.values = g.weights3d.cwiseSqrt().cwiseInverse().asDiagonal() * q;
  for (auto& d : raw.gradients) d = raw.values;
  raw.local_eigenvalues = VectorX::Zero(5);
  const LocalBasisSet b = svd_filter(raw, g, 0.0);
  CHECK(b.count() == 5);
  CHECK((b.singular_values.array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(gram_deviation(b, g) < 1e-12);
}

TEST_CASE("zero threshold keeps all linearly independent functions") {
  const LGLGrid g = small_grid();
  const RawBasis raw = polynomial_raw(g, 6);
  const LocalBasisSet b = svd_filter(raw, g, 0.0);
  CHECK(b.count() == 6);
  CHECK(gram_deviation(b, g) < 1e-12);
  CHECK_THROWS_AS(svd_filter(raw, g, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(svd_filter(raw, g, 1e10), ConfigError);
}

TEST_CASE("filtered gradients equal the gradients of the filtered values") {
  const LGLGrid g = small_grid(7);
  const LocalBasisSet b = svd_filter(polynomial_raw(g, 4), g, 0.0);
  const auto grad = lgl_gradient(g, b.values);
  for (int a = 0; a < 3; ++a) CHECK((grad[a] - b.gradients[a]).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("face traces are the rows of the boundary nodes") {
  const LGLGrid g = small_grid(5);
  const LocalBasisSet b = svd_filter(polynomial_raw(g, 3), g, 0.0);
  for (int a = 0; a < 3; ++a) {
    for (Side side : {Side::Lower, Side::Upper}) {
      const FaceTrace t = face_trace(g, b.values, a, side);
      CHECK((t.values - b.face_values[face_slot(a, side)]).cwiseAbs().maxCoeff() == 0.0);
      CHECK(b.face_normal_derivatives[face_slot(a, side)].rows() == 25);
    }
  }
}

TEST_CASE("zero buffer on a single element reproduces the global Hamiltonian") {
  const KohnShamModel m = test::chain_model(1, 12, 0.2);
  const Partition p = build_partition(m.domain, {1, 1, 1}, std::vector<Vec3>{});
  const ExtendedElement q = extended_element(p, m.grid, 0, Vec3::Zero());
  REQUIRE(q.grid.size() == m.grid.size());
  const SpectralHamiltonian local = local_hamiltonian(q, m.v_ext, m);
  const SpectralHamiltonian global(m.grid, m.v_ext.values, sparse_projectors(m.atoms, m.domain, m.grid, m.grid));
  const MatrixX x = test::random_matrix(m.grid.size(), 3, 5);
  const MatrixX hl = local.apply(x), hg = global.apply(x);
  CHECK((hl - hg).cwiseAbs().maxCoeff() <= 1e-12 * hg.cwiseAbs().maxCoeff());
}

TEST_CASE("converged local basis on the whole cell matches the global eigenvalues") {
  const KohnShamModel m = test::chain_model(1, 12, 0.2);
  std::vector<Vec3> pos;
  for (const auto& a : m.atoms) pos.push_back(a.position);
  const Partition p = build_partition(m.domain, {1, 1, 1}, pos);
  const LGLGrid g(p.elements[0].lo, p.elements[0].extent(), {8, 8, 8});
  BasisOptions o;
  o.count = 4;
  o.extra_states = 2;
  BasisGenerator gen(m, p, 0, Vec3::Zero(), g, o);
  const RawBasis raw = gen.generate(m.v_ext, true);
  REQUIRE(gen.local_solution().converged);
  CHECK(raw.values.rows() == g.size());
  CHECK(raw.values.cols() == 4);

  const SpectralHamiltonian h(m.grid, m.v_ext.values, sparse_projectors(m.atoms, m.domain, m.grid, m.grid));
  LobpcgOptions lo;
  lo.tolerance = 1e-9;
  lo.max_iterations = 2000;
  const EigenSolution ref = lobpcg_solve(h, random_block(m.grid.size(), 6, 99), lo);
  REQUIRE(ref.converged);
  CHECK((raw.local_eigenvalues - ref.eigenvalues.head(4)).cwiseAbs().maxCoeff() < 1e-8);

  // Local residual: H phi - lambda phi on the extended grid.
  const EigenSolution& s = gen.local_solution();
  const MatrixX r = h.apply(s.orbitals) - s.orbitals * s.eigenvalues.asDiagonal();
  const double dv = m.grid.cell_volume();
  for (Eigen::Index c = 0; c < r.cols(); ++c) CHECK(r.col(c).norm() * std::sqrt(dv) < 1e-7);
}

TEST_CASE("a larger basis contains the span of a smaller one") {
  const KohnShamModel m = test::chain_model(2, 12, 0.2);
  std::vector<Vec3> pos;
  for (const auto& a : m.atoms) pos.push_back(a.position);
  const Partition p = build_partition(m.domain, {1, 1, 2}, pos);
  const LGLGrid g(p.elements[0].lo, p.elements[0].extent(), {8, 8, 8});
  const Vec3 buffer(0.0, 0.0, 3 * m.grid.spacing(2));
  BasisOptions o;
  o.extra_states = 3;
  o.count = 4;
  BasisGenerator g4(m, p, 0, buffer, g, o);
  o.count = 8;
  BasisGenerator g8(m, p, 0, buffer, g, o);
  const LocalBasisSet b4 = svd_filter(g4.generate(m.v_ext, true), g, 0.0);
  const LocalBasisSet b8 = svd_filter(g8.generate(m.v_ext, true), g, 0.0);
  REQUIRE(g4.local_solution().converged);
  REQUIRE(g8.local_solution().converged);
  CHECK(gram_deviation(b4, g) < 1e-12);
  CHECK(gram_deviation(b8, g) < 1e-12);
  // Coefficients of b4 in the orthonormal b8 basis keep the full norm.
  const MatrixX c = b8.values.transpose() * g.weights3d.asDiagonal() * b4.values;
  const MatrixX g44 = c.transpose() * c;
  CHECK((g44 - MatrixX::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-6);
  // The extended element is larger than the element along z only.
  CHECK(g4.extended().extent()[2] > p.elements[0].extent()[2]);
  CHECK(std::abs(g4.extended().extent()[0] - p.elements[0].extent()[0]) < 1e-12);
}

TEST_CASE("invalid basis requests are rejected") {
  const KohnShamModel m = test::chain_model(1, 12, 0.0);
  const Partition p = build_partition(m.domain, {1, 1, 1}, std::vector<Vec3>{});
  const LGLGrid g(p.elements[0].lo, p.elements[0].extent(), {4, 4, 4});
  BasisOptions o;
  o.count = 0;
  CHECK_THROWS_AS(BasisGenerator(m, p, 0, Vec3::Zero(), g, o), ConfigError);
  o.count = 5000;
  CHECK_THROWS_AS(BasisGenerator(m, p, 0, Vec3::Zero(), g, o), ConfigError);
}
