#pragma once

#include <vector>

namespace splinesde {

struct QuadratureRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;  // sum to 2
};

/// n-point Gauss–Legendre rule (Golub–Welsch); exact for degree 2n − 1.
QuadratureRule gauss_legendre(int n);

}  // namespace splinesde
