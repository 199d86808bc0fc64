#pragma once

// Discrete-ordinates direction sets for x-y geometry. Only the upper
// hemisphere (Omega_z > 0) is stored; weights carry both hemispheres.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mlqd::quadrature {

struct Direction {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double weight = 0.0;  ///< steradians

  /// sin of the polar angle measured from the z axis.
  double sin_polar() const { return std::sqrt(x * x + y * y); }
};

class AngularQuadrature {
 public:
  /// Checks unit norm, positive weights, nonzero in-plane components.
  explicit AngularQuadrature(std::vector<Direction> directions);

  std::size_t size() const { return directions_.size(); }
  const Direction& operator[](std::size_t m) const { return directions_[m]; }
  std::span<const Direction> directions() const { return directions_; }

  double total_weight() const;

  /// Throws std::invalid_argument unless sum w = 4pi, sum w Omega = 0 and
  /// sum w Omega Omega = 4pi/3 I, each to `tolerance`.
  void check_moments(double tolerance = 1e-12) const;

 private:
  std::vector<Direction> directions_;
};

/// Gauss-Legendre in cos(polar) (positive half of a 2*n_polar point rule)
/// crossed with n_azimuthal equally weighted azimuths per quadrant at
/// (pi/2)(j - 1/2)/n_azimuthal. M = 4 n_polar n_azimuthal.
AngularQuadrature build_product_quadrature(std::size_t n_polar, std::size_t n_azimuthal);

/// Lines "Ox Oy Oz w"; validated with check_moments().
AngularQuadrature load_quadrature(const std::string& path);

}  // namespace mlqd::quadrature
