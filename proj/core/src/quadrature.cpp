#include "mlqd/quadrature.hpp"

#include "mlqd/gauss.hpp"

#include <array>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mlqd::quadrature {

AngularQuadrature::AngularQuadrature(std::vector<Direction> directions)
    : directions_(std::move(directions)) {
  if (directions_.empty()) throw std::invalid_argument("quadrature has no directions");
  for (const auto& d : directions_) {
    const double norm = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
    if (std::abs(norm - 1.0) > 1e-13) throw std::invalid_argument("quadrature direction is not a unit vector");
    if (!(d.weight > 0.0)) throw std::invalid_argument("quadrature weights must be positive");
    if (std::abs(d.x) <= 1e-12 || std::abs(d.y) <= 1e-12) {
      throw std::invalid_argument("quadrature direction has a vanishing in-plane component");
    }
  }
}

double AngularQuadrature::total_weight() const {
  double sum = 0.0;
  for (const auto& d : directions_) sum += d.weight;
  return sum;
}

void AngularQuadrature::check_moments(double tolerance) const {
  constexpr double four_pi = 4.0 * std::numbers::pi;
  std::array<double, 3> first{};
  std::array<double, 6> second{};  // xx yy zz xy xz yz
  // Stored directions stand for (x, y, +-z); odd-in-z moments vanish.
  for (const auto& d : directions_) {
    first[0] += d.weight * d.x;
    first[1] += d.weight * d.y;
    second[0] += d.weight * d.x * d.x;
    second[1] += d.weight * d.y * d.y;
    second[2] += d.weight * d.z * d.z;
    second[3] += d.weight * d.x * d.y;
  }
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("quadrature moment condition violated: " + what);
  };
  if (std::abs(total_weight() - four_pi) > tolerance * four_pi) fail("sum of weights != 4pi");
  if (std::abs(first[0]) > tolerance * four_pi || std::abs(first[1]) > tolerance * four_pi) {
    fail("first moment != 0");
  }
  const double third = four_pi / 3.0;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(second[static_cast<std::size_t>(k)] - third) > tolerance * four_pi) {
      fail("diagonal second moment != 4pi/3");
    }
  }
  if (std::abs(second[3]) > tolerance * four_pi) fail("off-diagonal second moment != 0");
}

AngularQuadrature build_product_quadrature(std::size_t n_polar, std::size_t n_azimuthal) {
  if (n_polar == 0 || n_azimuthal == 0) {
    throw std::invalid_argument("product quadrature needs n_polar >= 1 and n_azimuthal >= 1");
  }
  const auto polar = numerics::gauss_legendre(2 * n_polar);
  const double azimuth_weight = 2.0 * std::numbers::pi / static_cast<double>(4 * n_azimuthal);
  std::vector<Direction> dirs;
  dirs.reserve(4 * n_polar * n_azimuthal);
  for (std::size_t q = 0; q < 4; ++q) {
    for (std::size_t j = 0; j < n_azimuthal; ++j) {
      const double phi = 0.5 * std::numbers::pi *
                         (static_cast<double>(q) + (static_cast<double>(j) + 0.5) /
                                                       static_cast<double>(n_azimuthal));
      const double cphi = std::cos(phi);
      const double sphi = std::sin(phi);
      for (std::size_t p = 0; p < n_polar; ++p) {
        // Positive half of the symmetric rule; its weights count both hemispheres.
        const double mu = polar.nodes[n_polar + p];
        const double s = std::sqrt((1.0 - mu) * (1.0 + mu));
        dirs.push_back({s * cphi, s * sphi, mu, 2.0 * polar.weights[n_polar + p] * azimuth_weight});
      }
    }
  }
  return AngularQuadrature(std::move(dirs));
}

AngularQuadrature load_quadrature(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open quadrature file: " + path);
  std::vector<Direction> dirs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    Direction d;
    if (!(fields >> d.x >> d.y >> d.z >> d.weight)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 'Ox Oy Oz w'");
    }
    dirs.push_back(d);
  }
  AngularQuadrature quad(std::move(dirs));
  quad.check_moments();
  return quad;
}

}  // namespace mlqd::quadrature
