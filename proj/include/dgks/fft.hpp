#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "dgks/uniform_grid.hpp"

namespace dgks {

using Complex = std::complex<double>;
using VectorXc = Eigen::VectorXcd;

// 3D complex FFT on an x-fastest uniform grid, done line by line with Eigen's
// FFT module. `inverse` carries the 1/N normalization.
class Fft3d {
 public:
  explicit Fft3d(const Index3& n);
  ~Fft3d();
  Fft3d(Fft3d&&) noexcept;
  Fft3d& operator=(Fft3d&&) noexcept;

  void forward(VectorXc& data) const;
  void inverse(VectorXc& data) const;
  const Index3& dims() const { return n_; }

 private:
  void transform(VectorXc& data, bool inverse) const;
  struct Impl;
  Index3 n_;
  std::unique_ptr<Impl> impl_;
};

// Angular wavenumbers for a periodic axis; the Nyquist entry is +pi*n/L.
VectorX wavenumbers(int n, double length);
// |k|^2 per Fourier mode in flat order.
VectorX wavenumber_squared(const UniformGrid& grid);

// Apply a real, inversion-symmetric Fourier multiplier to each real column.
// Two columns share one complex transform.
MatrixX apply_multiplier(const Fft3d& fft, const VectorX& multiplier, const MatrixX& columns);

}  // namespace dgks
