#pragma once

// Reduction kernels used by the quadrature and Wigner-pairing loops. Each
// entry has a portable scalar reference and, on x86-64, an AVX2/FMA variant
// picked at first use (WEYL_SIMD=scalar in the environment forces scalar).

#include <cstddef>

namespace weyl::kernels {

struct Table {
  const char* name;
  /// sum_i a_i b_i
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// (sum_i x_i a_i, sum_i x_i b_i)
  void (*dot2)(const double* x, const double* a, const double* b, std::size_t n, double* sa, double* sb);
  /// sum_i (are_i + i aim_i)(bre_i + i bim_i)
  void (*cdot)(const double* are, const double* aim, const double* bre, const double* bim, std::size_t n,
               double* re, double* im);
};

const Table& scalar();
/// nullptr when the build or the CPU lacks AVX2/FMA.
const Table* avx2();
const Table& active();

}  // namespace weyl::kernels
