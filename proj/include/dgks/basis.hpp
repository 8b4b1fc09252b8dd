#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "dgks/geometry.hpp"
#include "dgks/grids.hpp"
#include "dgks/reference_solver.hpp"

namespace dgks {

// Unfiltered local functions on an element's LGL grid.
struct RawBasis {
  MatrixX values;                    // (LGL nodes x J)
  std::array<MatrixX, 3> gradients;  // same shape as values
  VectorX local_eigenvalues;
};

// Orthonormal adaptive basis of one element. Face data is indexed by
// 2 * axis + side (side 0 = lower, 1 = upper).
struct LocalBasisSet {
  int element = 0;
  MatrixX values;
  std::array<MatrixX, 3> gradients;
  std::array<MatrixX, 6> face_values;
  std::array<MatrixX, 6> face_normal_derivatives;  // d/d(axis), not sign-adjusted
  VectorX local_eigenvalues;
  VectorX singular_values;
  Vec3 buffer = Vec3::Zero();

  int count() const { return static_cast<int>(values.cols()); }
};

inline int face_slot(int axis, Side side) { return 2 * axis + (side == Side::Upper ? 1 : 0); }

// Periodic Hamiltonian on Q_k: V_eff copied from the global grid, projectors of
// every atom whose wrapped position lies in Q_k.
SpectralHamiltonian local_hamiltonian(const ExtendedElement& q, const ScalarField& v_eff,
                                      const KohnShamModel& model);

// SVD filtering under the LGL-weighted l2 product: keeps left singular
// vectors with singular value > threshold and maps gradients with the same
// linear transformation.
LocalBasisSet svd_filter(const RawBasis& raw, const LGLGrid& grid, double threshold);

// Fill the face traces of values and normal derivatives.
void attach_face_traces(LocalBasisSet& basis, const LGLGrid& grid);

// max |G - I| with G the LGL-weighted Gram matrix.
double gram_deviation(const LocalBasisSet& basis, const LGLGrid& grid);

struct BasisOptions {
  int count = 1;           // J_k
  int extra_states = -1;   // < 0: max(2, J_k / 10)
  int inner_iterations = 3;
  double tolerance = 1e-9;
  int converge_max_iterations = 2000;
  std::uint64_t seed = 1;
};

// Builds the adaptive local basis of one element, keeping the local
// eigenvectors between calls as the next warm start.
class BasisGenerator {
 public:
  BasisGenerator(const KohnShamModel& model, const Partition& partition, int element, const Vec3& buffer,
                 const LGLGrid& grid, BasisOptions options);

  // Local eigen-solve, then restriction of the lowest J_k eigenfunctions and
  // their gradients to the element's LGL grid.
  RawBasis generate(const ScalarField& v_eff, bool converge = false);

  const ExtendedElement& extended() const { return q_; }
  int states() const { return states_; }
  const EigenSolution& local_solution() const { return last_; }

 private:
  const KohnShamModel& model_;
  ExtendedElement q_;
  BasisOptions options_;
  int states_ = 0;
  std::array<MatrixX, 3> to_lgl_;
  std::array<MatrixX, 3> to_lgl_derivative_;
  Index3 lgl_n_{};
  std::vector<SparseProjector> projectors_;
  MatrixX x_;
  EigenSolution last_;
};

}  // namespace dgks
