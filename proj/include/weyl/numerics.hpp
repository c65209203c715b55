#pragma once

#include <complex>
#include <vector>

namespace weyl {

using cplx = std::complex<double>;

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b].
GaussRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// ln Gamma(z) on the principal branch (Lanczos g = 7, reflection for Re z < 1/2).
cplx lgamma_complex(cplx z);
cplx gamma_complex(cplx z);

/// All multi-indices alpha in N^d with |alpha| = order, in lexicographic order.
std::vector<std::vector<int>> multi_indices(int d, int order);

double factorial(int n);
double multi_factorial(const std::vector<int>& alpha);

}  // namespace weyl
