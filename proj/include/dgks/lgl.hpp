#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Core>

namespace dgks {

// Legendre-Gauss-Lobatto rule on [-1, 1]: ascending nodes including both
// endpoints, positive weights summing to 2, and the nodal differentiation
// matrix (exact for polynomials of degree <= n - 1).
template <typename Scalar = double>
struct Lgl1d {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Vector nodes;
  Vector weights;
  Matrix diff;
};

// Barycentric weights 1 / prod_{m != j} (x_j - x_m).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> barycentric_weights(
    const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lambda(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Scalar p(1);
    for (Eigen::Index m = 0; m < n; ++m) {
      if (m != j) p *= (x[j] - x[m]);
    }
    lambda[j] = Scalar(1) / p;
  }
  return lambda;
}

// Differentiation matrix for nodal values at x; diagonal set by the negative
// row sum so derivatives of constants vanish identically.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> differentiation_matrix(
    const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  const auto lambda = barycentric_weights(x);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> d =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar row(0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      d(i, j) = (lambda[j] / lambda[i]) / (x[i] - x[j]);
      row += d(i, j);
    }
    d(i, i) = -row;
  }
  return d;
}

// Lagrange interpolation matrix from nodal values at `nodes` to `points`.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> lagrange_matrix(
    const Eigen::MatrixBase<DerivedA>& nodes, const Eigen::MatrixBase<DerivedB>& points) {
  using Scalar = typename DerivedA::Scalar;
  const Eigen::Index n = nodes.size();
  const Eigen::Index m = points.size();
  const auto lambda = barycentric_weights(nodes);
  const Scalar scale = (nodes[n - 1] - nodes[0]);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> l =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Index hit = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(points[i] - nodes[j]) <= Scalar(64) * std::numeric_limits<Scalar>::epsilon() * scale) {
        hit = j;
        break;
      }
    }
    if (hit >= 0) {
      l(i, hit) = Scalar(1);
      continue;
    }
    Scalar denom(0);
    for (Eigen::Index j = 0; j < n; ++j) {
      l(i, j) = lambda[j] / (points[i] - nodes[j]);
      denom += l(i, j);
    }
    l.row(i) /= denom;
  }
  return l;
}

template <typename Scalar = double>
Lgl1d<Scalar> lgl_1d(int n) {
  if (n < 2) throw std::invalid_argument("LGL rule needs at least 2 nodes");
  using Vector = typename Lgl1d<Scalar>::Vector;
  const int degree = n - 1;
  const Scalar pi = Scalar(3.14159265358979323846264338327950288L);
  Vector x(n);
  for (int j = 0; j < n; ++j) x[j] = -std::cos(pi * Scalar(j) / Scalar(degree));

  // Newton iteration on (1 - x^2) P'_{n-1}(x) via the Legendre recurrence.
  Vector p_prev(n), p_cur(n);
  for (int iter = 0; iter < 100; ++iter) {
    Vector p0 = Vector::Ones(n);
    Vector p1 = x;
    for (int k = 2; k <= degree; ++k) {
      Vector p2 = ((Scalar(2 * k - 1) * x.array() * p1.array() - Scalar(k - 1) * p0.array()) /
                   Scalar(k))
                      .matrix();
      p0 = p1;
      p1 = p2;
    }
    p_prev = p0;
    p_cur = p1;
    const Vector dx = ((x.array() * p_cur.array() - p_prev.array()) / (Scalar(n) * p_cur.array())).matrix();
    x -= dx;
    if (dx.cwiseAbs().maxCoeff() < Scalar(1e-14)) break;
  }
  // Recompute P_{n-1} at the converged nodes.
  {
    Vector p0 = Vector::Ones(n);
    Vector p1 = x;
    for (int k = 2; k <= degree; ++k) {
      Vector p2 = ((Scalar(2 * k - 1) * x.array() * p1.array() - Scalar(k - 1) * p0.array()) /
                   Scalar(k))
                      .matrix();
      p0 = p1;
      p1 = p2;
    }
    p_cur = p1;
  }
  x[0] = Scalar(-1);
  x[n - 1] = Scalar(1);
  if (n % 2 == 1) x[n / 2] = Scalar(0);
  // Enforce exact antisymmetry of the node set.
  for (int j = 0; j < n / 2; ++j) {
    const Scalar s = Scalar(0.5) * (x[n - 1 - j] - x[j]);
    x[j] = -s;
    x[n - 1 - j] = s;
  }

  Lgl1d<Scalar> r;
  r.nodes = x;
  r.weights = (Scalar(2) / (Scalar(degree) * Scalar(n) * p_cur.array().square())).matrix();
  for (int j = 0; j < n / 2; ++j) {
    const Scalar w = Scalar(0.5) * (r.weights[j] + r.weights[n - 1 - j]);
    r.weights[j] = w;
    r.weights[n - 1 - j] = w;
  }
  r.diff = differentiation_matrix(x);
  return r;
}

}  // namespace dgks
