#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace dgks {

using Vec3 = Eigen::Vector3d;
using Index3 = std::array<int, 3>;

using VectorX = Eigen::VectorXd;
using MatrixX = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

// Boltzmann constant in Hartree per Kelvin.
inline constexpr double kBoltzmannAu = 3.166811563e-6;
inline constexpr double kHartreeToMeV = 27211.4;

// Thrown for inputs that violate a documented precondition.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline long long product(const Index3& n) {
  return static_cast<long long>(n[0]) * n[1] * n[2];
}

// Wrap x into [0, length).
inline double wrap(double x, double length) {
  double r = x - length * std::floor(x / length);
  if (r >= length) r -= length;
  return r;
}

// Minimal-image displacement in [-length/2, length/2).
inline double minimal_image(double d, double length) {
  return d - length * std::floor(d / length + 0.5);
}

inline int wrap_index(long long i, int n) {
  long long r = i % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

}  // namespace dgks
