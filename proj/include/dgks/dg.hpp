#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "dgks/basis.hpp"
#include "dgks/parallel.hpp"
#include "dgks/scf.hpp"

namespace dgks {

// Jump [[u]] = u1 n1 + u2 n2 and mean {{q}} = (q1 + q2) / 2 on one face, for
// scalar traces u and vector traces q given as (face nodes x 3).
struct JumpMean {
  MatrixX jump;  // (face nodes x 3)
  MatrixX mean;  // (face nodes x 3)
};
JumpMean jump_and_mean(const Face& face, const VectorX& u_lower, const VectorX& u_upper,
                       const MatrixX& q_lower, const MatrixX& q_upper);

// Per-element geometry shared by assembly and density reconstruction.
struct DGGeometry {
  const KohnShamModel* model = nullptr;
  Partition partition;
  std::vector<LGLGrid> grids;
  std::vector<ElementUniformMap> uniform_maps;
  std::vector<std::array<MatrixX, 3>> potential_to_lgl;  // global grid -> LGL nodes

  // Projector samples on every overlapping element's LGL grid.
  struct ElementProjector {
    int projector = 0;  // global projector index
    int element = 0;
    VectorX values;
  };
  std::vector<double> projector_coefficients;
  std::vector<std::vector<ElementProjector>> element_projectors;  // per element

  DGGeometry(const KohnShamModel& model, Partition partition, const Index3& lgl_order);

  VectorX potential_on_lgl(int element, const ScalarField& v) const;
};

struct DGSystem {
  MatrixX stiffness;               // A
  std::vector<Eigen::Index> offsets;  // row offset of each element block, size M + 1
  double alpha = 0.0;
  double h = 0.0;

  Eigen::Index dimension() const { return stiffness.rows(); }
  // (element, local index) of a global row.
  std::pair<int, int> index_of(Eigen::Index row) const;
};

DGSystem assemble_stiffness(const DGGeometry& geometry, const std::vector<LocalBasisSet>& bases,
                            const ScalarField& v_eff, double alpha, const WorkPlan& plan);

struct DGEigenSolution {
  VectorX eigenvalues;
  MatrixX coefficients;  // (dimension x N)
  VectorX residual_norms;
};

DGEigenSolution solve_dg(const DGSystem& system, int n_states, Eigen::Index max_dimension = 20000);

struct DensityReconstruction {
  ScalarField rho;
  double raw_integral = 0.0;  // before renormalization
};

DensityReconstruction reconstruct_density(const DGGeometry& geometry, const DGSystem& system,
                                          const DGEigenSolution& solution,
                                          const std::vector<LocalBasisSet>& bases,
                                          const VectorX& occupations, double n_electrons);

// Binary layout (little endian): "DGKSMAT1", uint64 dim, float64 alpha,
// float64 h, dim x (int64 element, int64 local index), dim*dim float64 row-major.
void write_stiffness(std::ostream& out, const DGSystem& system);
DGSystem read_stiffness(std::istream& in);

struct DGOptions {
  Index3 lgl_order{40, 40, 40};
  Vec3 buffer = Vec3::Zero();
  std::vector<int> basis_counts;  // J_k per element
  double alpha = 20.0;
  double svd_threshold = 0.0;
  int n_states = 1;
  int inner_iterations = 3;
  double tolerance = 1e-9;
  std::uint64_t seed = 1;
  int workers = 1;
  Eigen::Index max_dimension = 20000;
};

struct DGTimings {
  double basis = 0.0;
  double assembly = 0.0;
  double eigensolve = 0.0;
  double density = 0.0;
  std::vector<double> basis_per_element;  // accumulated per element
};

// Adaptive-local-basis DG eigenstep: basis generation on every extended
// element, stiffness assembly, dense eigensolve, density reconstruction.
class DGEigenStep : public EigenStep {
 public:
  DGEigenStep(const KohnShamModel& model, const Partition& partition, DGOptions options);

  VectorX solve(const EffectivePotential& v_eff, bool converge) override;
  ScalarField density(const VectorX& occupations) override;

  const DGGeometry& geometry() const { return geometry_; }
  const WorkPlan& plan() const { return plan_; }
  const std::vector<LocalBasisSet>& bases() const { return bases_; }
  const DGSystem& system() const { return system_; }
  const DGEigenSolution& solution() const { return solution_; }
  const DGTimings& timings() const { return timings_; }
  // max |Gram - I| over elements, one entry per solve() call.
  const std::vector<double>& gram_history() const { return gram_history_; }
  const std::vector<double>& raw_density_integrals() const { return raw_integrals_; }

 private:
  const KohnShamModel& model_;
  DGOptions options_;
  DGGeometry geometry_;
  WorkPlan plan_;
  std::vector<std::unique_ptr<BasisGenerator>> generators_;
  std::vector<LocalBasisSet> bases_;
  DGSystem system_;
  DGEigenSolution solution_;
  DGTimings timings_;
  std::vector<double> gram_history_;
  std::vector<double> raw_integrals_;
};

}  // namespace dgks
