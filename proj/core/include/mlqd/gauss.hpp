#pragma once

#include <cstddef>
#include <vector>

namespace mlqd::numerics {

/// Nodes and weights of a one-dimensional quadrature rule.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule on [-1, 1]. Nodes ascending.
QuadratureRule gauss_legendre(std::size_t n);

/// Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(std::size_t n, double a, double b);

/// Gauss-Laguerre rule for weight exp(-x) on [0, inf).
QuadratureRule gauss_laguerre(std::size_t n);

}  // namespace mlqd::numerics
