#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "dgks/types.hpp"

namespace dgks {

struct LobpcgOptions {
  double tolerance = 1e-8;  // on ||A x - lambda x|| for unit x
  int max_iterations = 100;
  double drop_threshold = 1e-12;  // relative Gram eigenvalue below which directions are dropped
  double recompute_amplification = 1e3;  // transform size above which A Y is reapplied
};

struct LobpcgResult {
  VectorX eigenvalues;
  MatrixX vectors;  // Euclidean-orthonormal columns
  VectorX residual_norms;
  int iterations = 0;
  bool converged = false;
  std::vector<VectorX> ritz_history;  // Ritz values after the initial and each update
};

// Orthonormalize columns (Euclidean) and keep `ax` consistent if given.
// Columns that are numerically dependent are dropped. `amplification`
// receives the largest entry of the applied transform.
inline MatrixX orthonormal_basis(const MatrixX& y, double drop_threshold, MatrixX* ay = nullptr,
                                 double* amplification = nullptr) {
  if (y.cols() == 0) return y;
  VectorX norms = y.colwise().norm().transpose();
  for (Eigen::Index i = 0; i < norms.size(); ++i) norms[i] = norms[i] > 0.0 ? 1.0 / norms[i] : 0.0;
  const MatrixX ys = y * norms.asDiagonal();
  MatrixX g = ys.transpose() * ys;
  g = 0.5 * (g + g.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixX> es(g);
  const VectorX& s = es.eigenvalues();
  const double smax = s.size() ? s.maxCoeff() : 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > drop_threshold * smax && s[i] > 0.0) keep.push_back(i);
  }
  MatrixX t(y.cols(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    t.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]) / std::sqrt(s[keep[j]]);
  }
  t = norms.asDiagonal() * t;
  if (amplification) *amplification = t.size() ? t.cwiseAbs().maxCoeff() : 0.0;
  if (ay) *ay = (*ay) * t;
  return y * t;
}

// Random block with entries uniform in [-1, 1], orthonormalized.
inline MatrixX random_block(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MatrixX x(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) x(r, c) = u(rng);
  return orthonormal_basis(x, 1e-14);
}

// Locally optimal block preconditioned conjugate gradient for the lowest
// x0.cols() eigenpairs of a symmetric operator. `apply(X)` returns A X;
// `precondition(R, X, AX)` returns the preconditioned residual block.
// Each update performs Rayleigh-Ritz on span{X, W, P}; the search directions
// are orthonormalized with a Gram eigen-decomposition, dropping dependent ones.
template <typename Apply, typename Precondition>
LobpcgResult lobpcg(Apply&& apply, Precondition&& precondition, const MatrixX& x0,
                    const LobpcgOptions& opt = {}) {
  const Eigen::Index m = x0.cols();
  LobpcgResult result;
  MatrixX x = orthonormal_basis(x0, 1e-14);
  if (x.cols() != m) throw std::invalid_argument("initial block is rank deficient");
  MatrixX ax = apply(x);

  auto rayleigh_ritz = [&](const MatrixX& s, const MatrixX& as, MatrixX& coef) {
    MatrixX h = s.transpose() * as;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixX> es(h);
    coef = es.eigenvectors().leftCols(m);
    return VectorX(es.eigenvalues().head(m));
  };

  MatrixX coef;
  VectorX lambda = rayleigh_ritz(x, ax, coef);
  x = x * coef;
  ax = ax * coef;
  result.ritz_history.push_back(lambda);

  MatrixX p, ap;
  for (int it = 1;; ++it) {
    MatrixX r = ax - x * lambda.asDiagonal();
    result.residual_norms = r.colwise().norm().transpose();
    if (result.residual_norms.maxCoeff() <= opt.tolerance) {
      result.converged = true;
      result.iterations = it;
      break;
    }
    if (it > opt.max_iterations) {
      result.iterations = opt.max_iterations;
      break;
    }

    // Re-orthonormalize the current block (keeps A X consistent).
    {
      MatrixX gx = x.transpose() * x;
      Eigen::LLT<MatrixX> llt(gx);
      if (llt.info() == Eigen::Success) {
        const MatrixX rinv = llt.matrixU().solve(MatrixX::Identity(m, m));
        x = x * rinv;
        ax = ax * rinv;
        r = ax - x * lambda.asDiagonal();
      }
    }

    MatrixX w = precondition(r, x, ax);
    for (int pass = 0; pass < 2; ++pass) w -= x * (x.transpose() * w);
    w = orthonormal_basis(w, opt.drop_threshold);
    MatrixX aw = apply(w);

    MatrixX y, ay;
    if (p.cols() > 0) {
      for (int pass = 0; pass < 2; ++pass) {
        const MatrixX c = x.transpose() * p;
        p -= x * c;
        ap -= ax * c;
      }
      y.resize(x.rows(), w.cols() + p.cols());
      y << w, p;
      ay.resize(x.rows(), w.cols() + p.cols());
      ay << aw, ap;
    } else {
      y = w;
      ay = aw;
    }
    double amp = 0.0;
    y = orthonormal_basis(y, opt.drop_threshold, &ay, &amp);
    // Rescaling tiny directions amplifies rounding in A Y; recompute it then.
    if (amp > opt.recompute_amplification) ay = apply(y);

    MatrixX s(x.rows(), m + y.cols()), as(x.rows(), m + y.cols());
    s << x, y;
    as << ax, ay;
    lambda = rayleigh_ritz(s, as, coef);
    const MatrixX cy = coef.bottomRows(y.cols());
    p = y * cy;
    ap = ay * cy;
    x = s * coef;
    ax = as * coef;
    result.ritz_history.push_back(lambda);
  }
  result.eigenvalues = lambda;
  result.vectors = x;
  return result;
}

}  // namespace dgks
