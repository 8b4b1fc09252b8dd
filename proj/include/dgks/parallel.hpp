#pragma once

#include <exception>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "dgks/geometry.hpp"
#include "dgks/hamiltonian.hpp"

namespace dgks {

// Element-to-worker assignment plus, per element, the elements whose basis
// data it reads: face neighbours and every element touched by a projector of
// an atom it owns.
struct WorkPlan {
  int workers = 1;
  std::vector<int> owner;
  std::vector<std::vector<int>> dependencies;

  int elements() const { return static_cast<int>(owner.size()); }
  std::vector<int> elements_of(int worker) const;
};

WorkPlan build_workplan(const Partition& partition, std::span<const AtomSpec> atoms, int workers);

// Elements whose (closed) box intersects the support of any projector of `atom`.
std::vector<int> projector_overlap_elements(const Partition& partition, const AtomSpec& atom);

// Worker count from DGKS_WORKERS when set, else `fallback`.
int workers_from_environment(int fallback);

class ElementTaskError : public std::runtime_error {
 public:
  ElementTaskError(int element, const std::string& what)
      : std::runtime_error("element " + std::to_string(element) + ": " + what), element_(element) {}
  int element() const { return element_; }

 private:
  int element_;
};

// Run task(k) for every element, each worker taking its contiguous block.
// Results are returned in element order, independent of the worker count.
template <typename Task>
auto parallel_map(const WorkPlan& plan, Task&& task) {
  using R = std::invoke_result_t<Task&, int>;
  const int n = plan.elements();
  std::vector<R> results(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  auto run_worker = [&](int w) {
    for (int k : plan.elements_of(w)) {
      try {
        results[static_cast<std::size_t>(k)] = task(k);
      } catch (...) {
        errors[static_cast<std::size_t>(k)] = std::current_exception();
      }
    }
  };
  if (plan.workers <= 1) {
    run_worker(0);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(static_cast<std::size_t>(plan.workers));
    for (int w = 0; w < plan.workers; ++w) threads.emplace_back(run_worker, w);
  }
  for (int k = 0; k < n; ++k) {
    if (!errors[static_cast<std::size_t>(k)]) continue;
    try {
      std::rethrow_exception(errors[static_cast<std::size_t>(k)]);
    } catch (const std::exception& e) {
      throw ElementTaskError(k, e.what());
    }
  }
  return results;
}

// Pairwise (tree) combination of values in index order.
template <typename T, typename Reduce>
T pairwise_reduce(std::vector<T> values, Reduce&& reduce) {
  if (values.empty()) throw std::invalid_argument("nothing to reduce");
  while (values.size() > 1) {
    std::vector<T> next;
    next.reserve((values.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < values.size(); i += 2) next.push_back(reduce(values[i], values[i + 1]));
    if (values.size() % 2 == 1) next.push_back(std::move(values.back()));
    values = std::move(next);
  }
  return std::move(values.front());
}

template <typename Task, typename Reduce>
auto parallel_map_reduce(const WorkPlan& plan, Task&& task, Reduce&& reduce) {
  return pairwise_reduce(parallel_map(plan, std::forward<Task>(task)), std::forward<Reduce>(reduce));
}

}  // namespace dgks
