#include "dgks/dg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include <Eigen/Eigenvalues>

namespace dgks {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Jump and mean-normal-derivative columns contributed by the basis of one
// element to one face.
struct FaceColumns {
  MatrixX jump;
  MatrixX mean;
};

struct FaceBlock {
  int lower = 0;
  int upper = 0;
  MatrixX block;  // rows/cols: lower basis then upper basis (only lower if equal)
};

}  // namespace

JumpMean jump_and_mean(const Face& face, const VectorX& u_lower, const VectorX& u_upper,
                       const MatrixX& q_lower, const MatrixX& q_upper) {
  JumpMean r;
  r.jump = u_lower * face.normal_lower.transpose() + u_upper * face.normal_upper.transpose();
  r.mean = 0.5 * (q_lower + q_upper);
  return r;
}

DGGeometry::DGGeometry(const KohnShamModel& m, Partition p, const Index3& lgl_order)
    : model(&m), partition(std::move(p)) {
  const int n = partition.size();
  grids.reserve(static_cast<std::size_t>(n));
  for (const Element& e : partition.elements) {
    grids.emplace_back(e.lo, e.extent(), lgl_order);
    uniform_maps.push_back(element_uniform_map(grids.back(), m.grid));
    std::array<MatrixX, 3> t;
    for (int a = 0; a < 3; ++a) {
      t[a] = fourier_matrix_1d(m.grid.n[a], m.grid.lo[a], m.grid.extent[a], grids.back().nodes[a]);
    }
    potential_to_lgl.push_back(std::move(t));
  }
  element_projectors.resize(static_cast<std::size_t>(n));
  int pid = 0;
  for (const AtomSpec& atom : m.atoms) {
    for (const ProjectorSpec& spec : atom.projectors) {
      const double norm = projector_normalization(atom, spec, m.domain, m.grid);
      projector_coefficients.push_back(spec.coefficient());
      for (const Element& e : partition.elements) {
        if (box_distance(partition.domain, e.lo, e.hi, atom.position) >= spec.cutoff) continue;
        ElementProjector ep;
        ep.projector = pid;
        ep.element = e.index;
        ep.values = grids[static_cast<std::size_t>(e.index)].sample([&](const Vec3& x) {
          return norm * projector_shape(spec, m.domain.minimal_image(x - atom.position));
        });
        element_projectors[static_cast<std::size_t>(e.index)].push_back(std::move(ep));
      }
      ++pid;
    }
  }
}

VectorX DGGeometry::potential_on_lgl(int element, const ScalarField& v) const {
  const auto& t = potential_to_lgl[static_cast<std::size_t>(element)];
  return apply_separable(v.values, v.grid.n, {t[0], t[1], t[2]}).col(0);
}

std::pair<int, int> DGSystem::index_of(Eigen::Index row) const {
  const auto it = std::upper_bound(offsets.begin(), offsets.end(), row);
  const int k = static_cast<int>(it - offsets.begin()) - 1;
  return {k, static_cast<int>(row - offsets[static_cast<std::size_t>(k)])};
}

DGSystem assemble_stiffness(const DGGeometry& geometry, const std::vector<LocalBasisSet>& bases,
                            const ScalarField& v_eff, double alpha, const WorkPlan& plan) {
  if (!(alpha > 0.0)) throw ConfigError("penalty parameter alpha must be positive");
  const Partition& part = geometry.partition;
  const double h = part.min_edge();
  if (!(h > 0.0)) throw ConfigError("element size must be positive");
  const int n = part.size();

  DGSystem sys;
  sys.alpha = alpha;
  sys.h = h;
  sys.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int k = 0; k < n; ++k) {
    sys.offsets[static_cast<std::size_t>(k) + 1] = sys.offsets[static_cast<std::size_t>(k)] + bases[static_cast<std::size_t>(k)].count();
  }
  const Eigen::Index dim = sys.offsets.back();

  struct ElementWork {
    MatrixX bulk;
    std::vector<FaceBlock> faces;
    std::vector<std::pair<int, VectorX>> overlaps;  // (projector, <phi_kj, b>)
  };
  const double penalty = alpha / h;

  auto work = [&](int k) {
    const LocalBasisSet& b = bases[static_cast<std::size_t>(k)];
    const LGLGrid& grid = geometry.grids[static_cast<std::size_t>(k)];
    const VectorX& w = grid.weights3d;
    ElementWork out;
    // Kinetic and local-potential terms: block diagonal.
    const VectorX wv = w.cwiseProduct(geometry.potential_on_lgl(k, v_eff));
    out.bulk = b.values.transpose() * wv.asDiagonal() * b.values;
    for (int d = 0; d < 3; ++d) out.bulk += 0.5 * (b.gradients[d].transpose() * w.asDiagonal() * b.gradients[d]);

    // Surface terms on the three faces where k is the lower element.
    for (int a = 0; a < 3; ++a) {
      const int k2 = part.neighbor(k, a, Side::Upper);
      const LocalBasisSet& b2 = bases[static_cast<std::size_t>(k2)];
      const LGLGrid& grid2 = geometry.grids[static_cast<std::size_t>(k2)];
      for (int t = 0; t < 3; ++t) {
        if (t == a) continue;
        if ((grid.nodes[t] - grid2.nodes[t]).cwiseAbs().maxCoeff() > 1e-12 * part.domain.extents[t]) {
          throw std::logic_error("neighbouring face grids do not coincide");
        }
      }
      const FaceTrace ft = face_trace(grid, MatrixX::Zero(grid.size(), 0), a, Side::Upper);
      const VectorX& fw = ft.weights;
      const int up = face_slot(a, Side::Upper);
      const int lo = face_slot(a, Side::Lower);
      FaceColumns c;
      if (k2 == k) {
        c.jump = b.face_values[up] - b.face_values[lo];
        c.mean = 0.5 * (b.face_normal_derivatives[up] + b.face_normal_derivatives[lo]);
      } else {
        c.jump.resize(fw.size(), b.count() + b2.count());
        c.jump << b.face_values[up], -b2.face_values[lo];
        c.mean.resize(fw.size(), b.count() + b2.count());
        c.mean << 0.5 * b.face_normal_derivatives[up], 0.5 * b2.face_normal_derivatives[lo];
      }
      const MatrixX wj = fw.asDiagonal() * c.jump;
      const MatrixX jm = wj.transpose() * c.mean;
      FaceBlock fb;
      fb.lower = k;
      fb.upper = k2;
      fb.block = -0.5 * (jm + jm.transpose()) + penalty * (wj.transpose() * c.jump);
      out.faces.push_back(std::move(fb));
    }

    // Projector overlaps computed with the element's LGL quadrature.
    for (const auto& ep : geometry.element_projectors[static_cast<std::size_t>(k)]) {
      out.overlaps.emplace_back(ep.projector, b.values.transpose() * w.cwiseProduct(ep.values));
    }
    return out;
  };
  const std::vector<ElementWork> parts = parallel_map(plan, work);

  sys.stiffness = MatrixX::Zero(dim, dim);
  MatrixX& a = sys.stiffness;
  for (int k = 0; k < n; ++k) {
    const Eigen::Index o = sys.offsets[static_cast<std::size_t>(k)];
    const auto& bulk = parts[static_cast<std::size_t>(k)].bulk;
    a.block(o, o, bulk.rows(), bulk.cols()) += bulk;
  }
  for (int k = 0; k < n; ++k) {
    for (const FaceBlock& fb : parts[static_cast<std::size_t>(k)].faces) {
      const Eigen::Index o1 = sys.offsets[static_cast<std::size_t>(fb.lower)];
      const Eigen::Index n1 = bases[static_cast<std::size_t>(fb.lower)].count();
      if (fb.lower == fb.upper) {
        a.block(o1, o1, n1, n1) += fb.block;
        continue;
      }
      const Eigen::Index o2 = sys.offsets[static_cast<std::size_t>(fb.upper)];
      const Eigen::Index n2 = bases[static_cast<std::size_t>(fb.upper)].count();
      a.block(o1, o1, n1, n1) += fb.block.topLeftCorner(n1, n1);
      a.block(o1, o2, n1, n2) += fb.block.topRightCorner(n1, n2);
      a.block(o2, o1, n2, n1) += fb.block.bottomLeftCorner(n2, n1);
      a.block(o2, o2, n2, n2) += fb.block.bottomRightCorner(n2, n2);
    }
  }
  // Nonlocal term: sum_l c_l <phi, b_l><b_l, phi>, rows gathered in element order.
  const std::size_t np = geometry.projector_coefficients.size();
  std::vector<VectorX> proj(np);
  std::vector<bool> touched(np, false);
  for (std::size_t p = 0; p < np; ++p) proj[p] = VectorX::Zero(dim);
  for (int k = 0; k < n; ++k) {
    const Eigen::Index o = sys.offsets[static_cast<std::size_t>(k)];
    for (const auto& [p, v] : parts[static_cast<std::size_t>(k)].overlaps) {
      proj[static_cast<std::size_t>(p)].segment(o, v.size()) = v;
      touched[static_cast<std::size_t>(p)] = true;
    }
  }
  for (std::size_t p = 0; p < np; ++p) {
    if (!touched[p]) continue;
    a.noalias() += geometry.projector_coefficients[p] * (proj[p] * proj[p].transpose());
  }
  return sys;
}

DGEigenSolution solve_dg(const DGSystem& system, int n_states, Eigen::Index max_dimension) {
  const Eigen::Index dim = system.dimension();
  if (dim > max_dimension) {
    throw ConfigError("DG matrix dimension " + std::to_string(dim) + " exceeds the cap of " +
                      std::to_string(max_dimension) + "; use fewer basis functions per element");
  }
  if (n_states > dim) throw ConfigError("more states requested than DG basis functions");
  Eigen::SelfAdjointEigenSolver<MatrixX> es(system.stiffness);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense DG eigensolve failed");
  DGEigenSolution s;
  s.eigenvalues = es.eigenvalues().head(n_states);
  s.coefficients = es.eigenvectors().leftCols(n_states);
  const MatrixX r = system.stiffness * s.coefficients - s.coefficients * s.eigenvalues.asDiagonal();
  s.residual_norms = r.colwise().norm().transpose();
  return s;
}

DensityReconstruction reconstruct_density(const DGGeometry& geometry, const DGSystem& system,
                                          const DGEigenSolution& solution,
                                          const std::vector<LocalBasisSet>& bases,
                                          const VectorX& occupations, double n_electrons) {
  const int n = geometry.partition.size();
  const Eigen::Index nocc = occupations.size();
  std::vector<VectorX> values(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const LocalBasisSet& b = bases[static_cast<std::size_t>(k)];
    const MatrixX c = solution.coefficients.block(system.offsets[static_cast<std::size_t>(k)], 0, b.count(), nocc);
    // Orbitals are interpolated to the uniform nodes, then squared.
    const MatrixX psi = geometry.uniform_maps[static_cast<std::size_t>(k)].interpolate(
        geometry.grids[static_cast<std::size_t>(k)], b.values * c);
    values[static_cast<std::size_t>(k)] = psi.cwiseAbs2() * occupations;
  }
  DensityReconstruction r;
  r.rho = average_to_uniform(geometry.model->grid, geometry.uniform_maps, values);
  r.raw_integral = r.rho.integral();
  if (r.raw_integral > 0.0) r.rho.values *= n_electrons / r.raw_integral;
  return r;
}

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("truncated stiffness dump");
  return v;
}

}  // namespace

void write_stiffness(std::ostream& out, const DGSystem& system) {
  out.write("DGKSMAT1", 8);
  const Eigen::Index dim = system.dimension();
  put<std::uint64_t>(out, static_cast<std::uint64_t>(dim));
  put<double>(out, system.alpha);
  put<double>(out, system.h);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const auto [k, j] = system.index_of(r);
    put<std::int64_t>(out, k);
    put<std::int64_t>(out, j);
  }
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) put<double>(out, system.stiffness(r, c));
}

DGSystem read_stiffness(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "DGKSMAT1", 8) != 0) throw std::runtime_error("not a stiffness dump");
  DGSystem s;
  const auto dim = static_cast<Eigen::Index>(get<std::uint64_t>(in));
  s.alpha = get<double>(in);
  s.h = get<double>(in);
  int last = -1;
  for (Eigen::Index r = 0; r < dim; ++r) {
    const auto k = static_cast<int>(get<std::int64_t>(in));
    const auto j = get<std::int64_t>(in);
    if (j == 0) {
      while (last < k) {
        s.offsets.push_back(r);
        ++last;
      }
    }
  }
  s.offsets.push_back(dim);
  s.stiffness.resize(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) s.stiffness(r, c) = get<double>(in);
  return s;
}

DGEigenStep::DGEigenStep(const KohnShamModel& model, const Partition& partition, DGOptions options)
    : model_(model), options_(std::move(options)), geometry_(model, partition, options_.lgl_order) {
  const int n = partition.size();
  if (static_cast<int>(options_.basis_counts.size()) != n) {
    throw ConfigError("one basis count per element is required");
  }
  plan_ = build_workplan(partition, model.atoms, options_.workers);
  for (int k = 0; k < n; ++k) {
    BasisOptions bo;
    bo.count = options_.basis_counts[static_cast<std::size_t>(k)];
    bo.inner_iterations = options_.inner_iterations;
    bo.tolerance = options_.tolerance;
    bo.seed = options_.seed;
    generators_.push_back(std::make_unique<BasisGenerator>(model, partition, k, options_.buffer,
                                                           geometry_.grids[static_cast<std::size_t>(k)], bo));
  }
  timings_.basis_per_element.assign(static_cast<std::size_t>(n), 0.0);
}

VectorX DGEigenStep::solve(const EffectivePotential& v_eff, bool converge) {
  auto t0 = std::chrono::steady_clock::now();
  struct Generated {
    LocalBasisSet basis;
    double seconds = 0.0;
  };
  auto gen = [&](int k) {
    const auto start = std::chrono::steady_clock::now();
    Generated g;
    const RawBasis raw = generators_[static_cast<std::size_t>(k)]->generate(v_eff.total, converge);
    g.basis = svd_filter(raw, geometry_.grids[static_cast<std::size_t>(k)], options_.svd_threshold);
    g.basis.element = k;
    g.basis.buffer = options_.buffer;
    g.seconds = seconds_since(start);
    return g;
  };
  std::vector<Generated> generated = parallel_map(plan_, gen);
  bases_.clear();
  double gram = 0.0;
  for (std::size_t k = 0; k < generated.size(); ++k) {
    timings_.basis_per_element[k] += generated[k].seconds;
    bases_.push_back(std::move(generated[k].basis));
    gram = std::max(gram, gram_deviation(bases_.back(), geometry_.grids[k]));
  }
  gram_history_.push_back(gram);
  timings_.basis += seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  system_ = assemble_stiffness(geometry_, bases_, v_eff.total, options_.alpha, plan_);
  timings_.assembly += seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  solution_ = solve_dg(system_, options_.n_states, options_.max_dimension);
  timings_.eigensolve += seconds_since(t0);
  return solution_.eigenvalues;
}

ScalarField DGEigenStep::density(const VectorX& occupations) {
  const auto t0 = std::chrono::steady_clock::now();
  DensityReconstruction r = reconstruct_density(geometry_, system_, solution_, bases_, occupations, model_.n_electrons);
  raw_integrals_.push_back(r.raw_integral);
  timings_.density += seconds_since(t0);
  return std::move(r.rho);
}

}  // namespace dgks
