#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <thread>

#include "dgks/parallel.hpp"
#include "fixtures.hpp"

using namespace dgks;

namespace {

AtomSpec atom_with_cutoff(const Vec3& x, double cutoff) {
  AtomSpec a = test::model_atom(x);
  a.projectors.front().cutoff = cutoff;
  return a;
}

}  // namespace

TEST_CASE("work plan assigns contiguous blocks differing by at most one") {
  const Domain d(Vec3(8, 8, 40));
  const Partition p = build_partition(d, {1, 1, 10}, std::vector<Vec3>{});
  const WorkPlan plan = build_workplan(p, {}, 3);
  CHECK(plan.workers == 3);
  CHECK(plan.owner == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 2, 2, 2});
  CHECK(plan.elements_of(1) == std::vector<int>{4, 5, 6});
  CHECK(build_workplan(p, {}, 64).workers == 10);
  CHECK_THROWS_AS(build_workplan(p, {}, 0), std::invalid_argument);
}

TEST_CASE("dependencies are face neighbours plus elements touched by owned projectors") {
  const Domain d(Vec3(8, 8, 24));
  const std::vector<AtomSpec> atoms = {atom_with_cutoff(Vec3(4, 4, 2), 6.5)};
  const std::vector<Vec3> pos = {atoms[0].position};
  const Partition p = build_partition(d, {1, 1, 6}, pos);
  const WorkPlan plan = build_workplan(p, atoms, 2);
  // The projector reaches z in (-4.5, 8.5) modulo 24: elements 4, 5, 0, 1, 2.
  CHECK(projector_overlap_elements(p, atoms[0]) == std::vector<int>{0, 1, 2, 4, 5});
  CHECK(plan.dependencies[0] == std::vector<int>{0, 1, 2, 4, 5});
  // Element 3 owns no atom: faces only (x and y neighbours are itself).
  CHECK(plan.dependencies[3] == std::vector<int>{2, 3, 4});
}

TEST_CASE("element-count reduction is the same for every worker count") {
  const Domain d(Vec3(8, 8, 56));
  const Partition p = build_partition(d, {1, 1, 7}, std::vector<Vec3>{});
  for (int w = 1; w <= 8; ++w) {
    const WorkPlan plan = build_workplan(p, {}, w);
    const int count = parallel_map_reduce(plan, [](int) { return 1; }, [](int a, int b) { return a + b; });
    CHECK(count == 7);
  }
}

TEST_CASE("floating-point reductions are bit-identical across worker counts") {
  const Domain d(Vec3(8, 8, 88));
  const Partition p = build_partition(d, {1, 1, 11}, std::vector<Vec3>{});
  auto task = [](int k) {
    VectorX v(3);
    for (int i = 0; i < 3; ++i) v[i] = std::sin(1.0 + k * 0.7 + i) * std::pow(10.0, (k % 5) - 2);
    return v;
  };
  auto add = [](const VectorX& a, const VectorX& b) { return VectorX(a + b); };
  const VectorX ref = parallel_map_reduce(build_workplan(p, {}, 1), task, add);
  for (int w : {2, 3, 4, 8}) {
    const WorkPlan plan = build_workplan(p, {}, w);
    const std::vector<VectorX> mapped = parallel_map(plan, task);
    for (int k = 0; k < 11; ++k) CHECK((mapped[static_cast<std::size_t>(k)].array() == task(k).array()).all());
    CHECK((parallel_map_reduce(plan, task, add).array() == ref.array()).all());
  }
}

TEST_CASE("pairwise reduction combines in index order") {
  const std::vector<std::string> parts = {"a", "b", "c", "d", "e"};
  const std::string r = pairwise_reduce(parts, [](const std::string& x, const std::string& y) { return "(" + x + y + ")"; });
  CHECK(r == "(((ab)(cd))e)");
  CHECK_THROWS_AS(pairwise_reduce(std::vector<int>{}, [](int a, int b) { return a + b; }), std::invalid_argument);
}

TEST_CASE("a failing element task reports its element index") {
  const Domain d(Vec3(8, 8, 48));
  const Partition p = build_partition(d, {1, 1, 6}, std::vector<Vec3>{});
  const WorkPlan plan = build_workplan(p, {}, 3);
  auto task = [](int k) {
    if (k == 3) throw std::runtime_error("local eigensolver failed");
    return k;
  };
  try {
    parallel_map(plan, task);
    FAIL("expected an element error");
  } catch (const ElementTaskError& e) {
    CHECK(e.element() == 3);
    CHECK(std::string(e.what()) == "element 3: local eigensolver failed");
  }
}

TEST_CASE("tasks of different workers run on separate threads") {
  const Domain d(Vec3(8, 8, 32));
  const Partition p = build_partition(d, {1, 1, 4}, std::vector<Vec3>{});
  const std::vector<std::thread::id> ids = parallel_map(build_workplan(p, {}, 4), [](int) { return std::this_thread::get_id(); });
  CHECK(ids[0] != ids[1]);
  CHECK(ids[2] != ids[3]);
  const std::vector<std::thread::id> one = parallel_map(build_workplan(p, {}, 1), [](int) { return std::this_thread::get_id(); });
  CHECK(one[0] == std::this_thread::get_id());
}

TEST_CASE("worker count from the environment") {
  ::unsetenv("DGKS_WORKERS");
  CHECK(workers_from_environment(2) == 2);
  ::setenv("DGKS_WORKERS", "5", 1);
  CHECK(workers_from_environment(2) == 5);
  ::setenv("DGKS_WORKERS", "0", 1);
  CHECK(workers_from_environment(2) == 2);
  ::unsetenv("DGKS_WORKERS");
}
