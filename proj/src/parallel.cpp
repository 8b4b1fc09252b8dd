#include "dgks/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

namespace dgks {

std::vector<int> WorkPlan::elements_of(int worker) const {
  std::vector<int> out;
  for (int k = 0; k < elements(); ++k) {
    if (owner[static_cast<std::size_t>(k)] == worker) out.push_back(k);
  }
  return out;
}

std::vector<int> projector_overlap_elements(const Partition& partition, const AtomSpec& atom) {
  std::vector<int> out;
  double radius = 0.0;
  for (const ProjectorSpec& p : atom.projectors) radius = std::max(radius, p.cutoff);
  if (atom.projectors.empty()) return out;
  for (const Element& e : partition.elements) {
    if (box_distance(partition.domain, e.lo, e.hi, atom.position) < radius) out.push_back(e.index);
  }
  return out;
}

WorkPlan build_workplan(const Partition& partition, std::span<const AtomSpec> atoms, int workers) {
  if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
  WorkPlan plan;
  const int n = partition.size();
  plan.workers = std::min(workers, std::max(n, 1));
  plan.owner.resize(static_cast<std::size_t>(n));
  // Contiguous blocks, sizes differing by at most one.
  for (int w = 0, k = 0; w < plan.workers; ++w) {
    const int count = n / plan.workers + (w < n % plan.workers ? 1 : 0);
    for (int c = 0; c < count; ++c, ++k) plan.owner[static_cast<std::size_t>(k)] = w;
  }
  plan.dependencies.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    std::set<int> deps;
    for (int a = 0; a < 3; ++a) {
      deps.insert(partition.neighbor(k, a, Side::Lower));
      deps.insert(partition.neighbor(k, a, Side::Upper));
    }
    for (int id : partition.elements[static_cast<std::size_t>(k)].atom_ids) {
      for (int e : projector_overlap_elements(partition, atoms[static_cast<std::size_t>(id)])) deps.insert(e);
    }
    plan.dependencies[static_cast<std::size_t>(k)].assign(deps.begin(), deps.end());
  }
  return plan;
}

int workers_from_environment(int fallback) {
  if (const char* env = std::getenv("DGKS_WORKERS")) {
    const int w = std::atoi(env);
    if (w >= 1) return w;
  }
  return fallback;
}

}  // namespace dgks
