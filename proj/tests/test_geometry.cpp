#include <doctest.h>

#include <set>

#include "dgks/geometry.hpp"
#include "fixtures.hpp"

using namespace dgks;

namespace {

Partition empty_partition(const Vec3& extents, const Index3& counts) {
  return build_partition(Domain(extents), counts, {});
}

}  // namespace

TEST_CASE("quasi-1D Na partition has four elements stacked along z") {
  const double a = test::kNaCell;
  const Partition p = empty_partition(Vec3(a, a, 4 * a), {1, 1, 4});
  REQUIRE(p.size() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(p.elements[k].extent().isApprox(Vec3(a, a, a), 1e-14));
    CHECK(p.elements[k].lo[2] == doctest::Approx(k * a));
  }
}

TEST_CASE("element volumes tile the domain") {
  for (const Index3 counts : {Index3{1, 1, 1}, Index3{2, 3, 4}, Index3{5, 1, 3}}) {
    const Partition p = empty_partition(Vec3(3.1, 4.7, 9.2), counts);
    double v = 0.0;
    for (const Element& e : p.elements) v += e.volume();
    CHECK(std::abs(v - p.domain.volume()) <= 1e-12 * p.domain.volume());
  }
}

TEST_CASE("face counts follow 3 m n p") {
  CHECK(empty_partition(Vec3(1, 1, 1), {2, 2, 2}).faces.size() == 24);
  CHECK(empty_partition(Vec3(1, 1, 4), {1, 1, 4}).faces.size() == 12);

  const Partition one = empty_partition(Vec3(1, 1, 1), {1, 1, 1});
  REQUIRE(one.faces.size() == 3);
  for (const Face& f : one.faces) {
    CHECK(f.lower == 0);
    CHECK(f.upper == 0);
  }
}

TEST_CASE("quasi-1D faces: z faces link consecutive elements, x and y faces are self-paired") {
  const Partition p = empty_partition(Vec3(1, 1, 4), {1, 1, 4});
  int z_faces = 0;
  for (const Face& f : p.faces) {
    if (f.axis == 2) {
      ++z_faces;
      CHECK(f.upper == (f.lower + 1) % 4);
    } else {
      CHECK(f.lower == f.upper);
    }
    CHECK((f.normal_lower + f.normal_upper).norm() == 0.0);
  }
  CHECK(z_faces == 4);
}

TEST_CASE("every element side maps to exactly one face") {
  const Partition p = empty_partition(Vec3(2, 3, 4), {2, 3, 2});
  std::multiset<int> seen;
  for (int k = 0; k < p.size(); ++k)
    for (int a = 0; a < 3; ++a) {
      const int lo = p.face_of(k, a, Side::Lower);
      const int up = p.face_of(k, a, Side::Upper);
      CHECK(p.faces[up].lower == k);
      CHECK(p.faces[lo].upper == k);
      CHECK(p.faces[lo].axis == a);
      seen.insert(lo);
      seen.insert(up);
    }
  for (int f = 0; f < static_cast<int>(p.faces.size()); ++f) CHECK(seen.count(f) == 2);
}

TEST_CASE("atoms are assigned with half-open boxes") {
  const Domain d(Vec3(2, 2, 4));
  const std::vector<Vec3> atoms{Vec3(0.5, 0.5, 1.0), Vec3(0.5, 0.5, 0.999), Vec3(0.5, 0.5, 4.0), Vec3(1, 1, 3.5)};
  const Partition p = build_partition(d, {1, 1, 4}, atoms);
  CHECK(p.locate(atoms[0]) == 1);
  CHECK(p.locate(atoms[1]) == 0);
  CHECK(p.locate(atoms[2]) == 0);  // wraps to z = 0
  CHECK(p.locate(atoms[3]) == 3);
  std::vector<int> owner(atoms.size(), -1);
  for (const Element& e : p.elements)
    for (int id : e.atom_ids) {
      CHECK(owner[id] == -1);
      owner[id] = e.index;
    }
  for (int o : owner) CHECK(o >= 0);
}

TEST_CASE("periodic wrap and minimal image") {
  const Domain d(Vec3(2, 3, 4));
  const Vec3 w = d.wrap(Vec3(-0.5, 7.0, 4.0));
  CHECK(w[0] == doctest::Approx(1.5));
  CHECK(w[1] == doctest::Approx(1.0));
  CHECK(w[2] == doctest::Approx(0.0));
  const Vec3 m = d.minimal_image(Vec3(1.9, -1.6, 2.1));
  CHECK(m[0] == doctest::Approx(-0.1));
  CHECK(m[1] == doctest::Approx(1.4));
  CHECK(m[2] == doctest::Approx(-1.9));
}

TEST_CASE("box distance agrees with a brute-force image search") {
  const Domain d(Vec3(3, 3, 6));
  const Vec3 lo(0, 0, 2), hi(3, 3, 3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 6.0);
  for (int t = 0; t < 50; ++t) {
    const Vec3 x(u(rng) / 2, u(rng) / 2, u(rng));
    double best = 1e300;
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        for (int k = -1; k <= 1; ++k) {
          const Vec3 y = x + Vec3(3.0 * i, 3.0 * j, 6.0 * k);
          const Vec3 c = y.cwiseMax(lo).cwiseMin(hi);
          best = std::min(best, (y - c).norm());
        }
    CHECK(box_distance(d, lo, hi, x) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("extended element with zero buffer equals the element") {
  const Domain d(Vec3(4, 4, 8));
  const Partition p = build_partition(d, {1, 1, 2}, {});
  const UniformGrid g{Vec3::Zero(), d.extents, {10, 10, 20}};
  const ExtendedElement q = extended_element(p, g, 1, Vec3::Zero());
  CHECK(q.lo.isApprox(p.elements[1].lo));
  CHECK(q.hi.isApprox(p.elements[1].hi));
  CHECK(q.grid.n == Index3{10, 10, 10});
  CHECK(q.offset == Index3{0, 0, 10});
}

TEST_CASE("Na element with half-cell buffer spans two cells along z") {
  const double a = test::kNaCell;
  const Domain d(Vec3(a, a, 4 * a));
  const Partition p = build_partition(d, {1, 1, 4}, {});
  const UniformGrid g{Vec3::Zero(), d.extents, {20, 20, 80}};
  const ExtendedElement q = extended_element(p, g, 2, Vec3(0, 0, 0.5 * a));
  CHECK(q.extent()[0] == doctest::Approx(a));
  CHECK(q.extent()[1] == doctest::Approx(a));
  CHECK(q.extent()[2] == doctest::Approx(2 * a));
  CHECK(q.grid.n == Index3{20, 20, 40});
}

TEST_CASE("extended elements are translation equivariant") {
  const double a = test::kNaCell;
  const Domain d(Vec3(a, a, 4 * a));
  const Partition p = build_partition(d, {1, 1, 4}, {});
  const UniformGrid g{Vec3::Zero(), d.extents, {20, 20, 80}};
  const Vec3 b(0, 0, 0.5 * a);
  const ExtendedElement q0 = extended_element(p, g, 0, b);
  for (int k = 1; k < 4; ++k) {
    const ExtendedElement qk = extended_element(p, g, k, b);
    CHECK((qk.lo - q0.lo - Vec3(0, 0, k * a)).norm() < 1e-12);
    CHECK(qk.offset[2] - q0.offset[2] == 20 * k);
  }
}

TEST_CASE("maximal buffer in a 4x4x4 partition spans the periodic domain") {
  const Domain d(Vec3(8, 8, 8));
  const Partition p = build_partition(d, {4, 4, 4}, {});
  const UniformGrid g{Vec3::Zero(), d.extents, {16, 16, 16}};
  const Vec3 cap = 0.5 * (d.extents - p.element_extent);
  const ExtendedElement q = extended_element(p, g, 21, cap);
  // Box arithmetic oracle over periodic images: elements fully inside Q_k
  // and elements whose interior meets Q_k.
  int inside = 0, touching = 0;
  for (const Element& e : p.elements) {
    bool in = false, meets = false;
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        for (int k = -1; k <= 1; ++k) {
          const Vec3 s(8.0 * i, 8.0 * j, 8.0 * k);
          in = in || (((e.lo + s).array() >= q.lo.array() - 1e-12).all() &&
                      ((e.hi + s).array() <= q.hi.array() + 1e-12).all());
          meets = meets || (((e.lo + s).array() < q.hi.array()).all() && ((e.hi + s).array() > q.lo.array()).all());
        }
    inside += in ? 1 : 0;
    touching += meets ? 1 : 0;
  }
  CHECK(q.extent().isApprox(d.extents));
  CHECK(q.grid.n == g.n);
  CHECK(inside == 27);
  CHECK(touching == 64);
}

TEST_CASE("buffer beyond the cap is rejected naming the axis") {
  const Domain d(Vec3(4, 4, 8));
  const Partition p = build_partition(d, {1, 1, 2}, {});
  const UniformGrid g{Vec3::Zero(), d.extents, {10, 10, 20}};
  CHECK_THROWS_WITH_AS(extended_element(p, g, 0, Vec3(0, 0, 2.4)), doctest::Contains("along z"), ConfigError);
  CHECK_THROWS_WITH_AS(extended_element(p, g, 0, Vec3(0.4, 0, 0)), doctest::Contains("along x"), ConfigError);
  CHECK_THROWS_AS(extended_element(p, g, 0, Vec3(0, 0, 0.3)), ConfigError);  // not on the grid
  CHECK_NOTHROW(extended_element(p, g, 0, Vec3(0, 0, 2.0)));
}

TEST_CASE("contains respects periodic wrap") {
  const Domain d(Vec3(4, 4, 8));
  const Partition p = build_partition(d, {1, 1, 2}, {});
  const UniformGrid g{Vec3::Zero(), d.extents, {10, 10, 20}};
  const ExtendedElement q = extended_element(p, g, 0, Vec3(0, 0, 1.2));
  CHECK(q.contains(Vec3(1, 1, 7.5), d));
  CHECK(q.contains(Vec3(1, 1, 4.8), d));
  CHECK(q.contains(Vec3(1, 1, 5.5), d) == false);
  CHECK(q.contains(Vec3(1, 1, 6.5), d) == false);
}
