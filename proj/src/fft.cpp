#include "dgks/fft.hpp"

#include <unsupported/Eigen/FFT>

namespace dgks {

struct Fft3d::Impl {
  mutable Eigen::FFT<double> fft;
  mutable std::vector<Complex> in;
  mutable std::vector<Complex> out;
};

Fft3d::Fft3d(const Index3& n) : n_(n), impl_(std::make_unique<Impl>()) {}
Fft3d::~Fft3d() = default;
Fft3d::Fft3d(Fft3d&&) noexcept = default;
Fft3d& Fft3d::operator=(Fft3d&&) noexcept = default;

void Fft3d::forward(VectorXc& data) const { transform(data, false); }
void Fft3d::inverse(VectorXc& data) const { transform(data, true); }

void Fft3d::transform(VectorXc& data, bool inverse) const {
  const Eigen::Index strides[3] = {1, n_[0], static_cast<Eigen::Index>(n_[0]) * n_[1]};
  Impl& s = *impl_;
  for (int axis = 0; axis < 3; ++axis) {
    const int len = n_[axis];
    if (len == 1) continue;
    s.in.resize(len);
    s.out.resize(len);
    const Eigen::Index stride = strides[axis];
    const int o1 = (axis == 0) ? 1 : 0;
    const int o2 = (axis == 2) ? 1 : 2;
    for (int b = 0; b < n_[o2]; ++b) {
      for (int a = 0; a < n_[o1]; ++a) {
        const Eigen::Index base = a * strides[o1] + b * strides[o2];
        for (int i = 0; i < len; ++i) s.in[i] = data[base + i * stride];
        if (inverse) {
          s.fft.inv(s.out, s.in);
        } else {
          s.fft.fwd(s.out, s.in);
        }
        for (int i = 0; i < len; ++i) data[base + i * stride] = s.out[i];
      }
    }
  }
}

VectorX wavenumbers(int n, double length) {
  VectorX k(n);
  for (int j = 0; j < n; ++j) {
    const int m = (j <= n / 2) ? j : j - n;
    k[j] = 2.0 * kPi * m / length;
  }
  return k;
}

VectorX wavenumber_squared(const UniformGrid& grid) {
  const VectorX kx = wavenumbers(grid.n[0], grid.extent[0]);
  const VectorX ky = wavenumbers(grid.n[1], grid.extent[1]);
  const VectorX kz = wavenumbers(grid.n[2], grid.extent[2]);
  VectorX k2(grid.size());
  for (int c = 0; c < grid.n[2]; ++c)
    for (int b = 0; b < grid.n[1]; ++b)
      for (int a = 0; a < grid.n[0]; ++a)
        k2[grid.flat(a, b, c)] = kx[a] * kx[a] + ky[b] * ky[b] + kz[c] * kz[c];
  return k2;
}

MatrixX apply_multiplier(const Fft3d& fft, const VectorX& multiplier, const MatrixX& columns) {
  MatrixX out(columns.rows(), columns.cols());
  VectorXc work(columns.rows());
  for (Eigen::Index c = 0; c < columns.cols(); c += 2) {
    const bool pair = (c + 1 < columns.cols());
    if (pair) {
      work.real() = columns.col(c);
      work.imag() = columns.col(c + 1);
    } else {
      work.real() = columns.col(c);
      work.imag().setZero();
    }
    fft.forward(work);
    work.array() *= multiplier.array();
    fft.inverse(work);
    out.col(c) = work.real();
    if (pair) out.col(c + 1) = work.imag();
  }
  return out;
}

}  // namespace dgks
