#pragma once

// Weyl quantization on L^2(R) in the Hermite-function basis.

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "weyl/cpow.hpp"
#include "weyl/symexpr.hpp"

namespace weyl {

using CMatrix = Eigen::MatrixXcd;

struct HermiteOperator {
  CMatrix matrix;
  int n_pad = 0;
  bool hermitian_flag = false;
  /// Quadrature window too small for the basis (quantize_general only).
  bool accuracy_warning = false;

  int n_basis() const { return static_cast<int>(matrix.rows()); }
};

/// Position and momentum matrices: X_{n,n+1} = sqrt((n+1)/2), P = -i d/dx.
CMatrix position_matrix(int n);
CMatrix momentum_matrix(int n);

/// Weyl-ordered quantization of a polynomial symbol in (x, xi), built at
/// n_pad >= n_basis + 2 deg and cropped. n_pad <= 0 selects the minimum.
HermiteOperator quantize_poly(const SymExpr& sigma, int n_basis, int n_pad = 0);

struct WignerQuadrature {
  /// radial Gauss-Legendre nodes and equispaced angles per basis function
  int nodes_per_state = 4;
  double window_margin = 8.0;
};

/// A_mn = \iint sigma W_{n,m} on a polar grid of radius sqrt(2 n_basis) + margin.
HermiteOperator quantize_general(const std::function<cplx(double, double)>& sigma, int n_basis,
                                 const WignerQuadrature& quad = {});
HermiteOperator quantize_general(const SymExpr& sigma, int n_basis, const WignerQuadrature& quad = {});

/// f(A) through the eigendecomposition of a hermitian A.
HermiteOperator matrix_function(const HermiteOperator& a, const std::function<cplx(double)>& f);

/// gamma_k(z) \int lambda^{z-1} (A (A + lambda)^{-1})^k dlambda
HermiteOperator balakrishnan_matrix(const HermiteOperator& a, cplx z, int k, const QuadratureScheme& quad = {});

struct SpectralReport {
  int first = 0;
  int last = 0;  // inclusive
  std::vector<double> state_error;
  double block_norm = 0.0;
  double max_error = 0.0;
  double median_error = 0.0;
};

/// Per-state ||(A-B) e_n|| / ||A e_n|| on [first, last] and ||(A-B)|| on that block.
SpectralReport spectral_compare(const HermiteOperator& a, const HermiteOperator& b, int first, int last);

void write_matrix_binary(const HermiteOperator& a, const std::string& path);
HermiteOperator read_matrix_binary(const std::string& path);
void write_matrix_csv(const HermiteOperator& a, const std::string& path);

}  // namespace weyl
