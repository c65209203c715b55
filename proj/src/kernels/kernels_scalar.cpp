#include "weyl/kernels.hpp"

namespace weyl::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0;
  std::size_t i = 0;
  for (; i + 1 < n; i += 2) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
  }
  if (i < n) s0 += a[i] * b[i];
  return s0 + s1;
}

void dot2_scalar(const double* x, const double* a, const double* b, std::size_t n, double* sa, double* sb) {
  double ra = 0.0, rb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ra += x[i] * a[i];
    rb += x[i] * b[i];
  }
  *sa = ra;
  *sb = rb;
}

void cdot_scalar(const double* are, const double* aim, const double* bre, const double* bim, std::size_t n,
                 double* re, double* im) {
  double r = 0.0, m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r += are[i] * bre[i] - aim[i] * bim[i];
    m += are[i] * bim[i] + aim[i] * bre[i];
  }
  *re = r;
  *im = m;
}

}  // namespace

const Table& scalar() {
  static const Table t{"scalar", dot_scalar, dot2_scalar, cdot_scalar};
  return t;
}

}  // namespace weyl::kernels
