#include <immintrin.h>

#include "weyl/kernels.hpp"

namespace weyl::kernels {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4) s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void dot2_avx2(const double* x, const double* a, const double* b, std::size_t n, double* sa, double* sb) {
  __m256d ra = _mm256_setzero_pd(), rb = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    ra = _mm256_fmadd_pd(xv, _mm256_loadu_pd(a + i), ra);
    rb = _mm256_fmadd_pd(xv, _mm256_loadu_pd(b + i), rb);
  }
  double ta = hsum(ra), tb = hsum(rb);
  for (; i < n; ++i) {
    ta += x[i] * a[i];
    tb += x[i] * b[i];
  }
  *sa = ta;
  *sb = tb;
}

void cdot_avx2(const double* are, const double* aim, const double* bre, const double* bim, std::size_t n,
               double* re, double* im) {
  __m256d r = _mm256_setzero_pd(), m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d ar = _mm256_loadu_pd(are + i), ai = _mm256_loadu_pd(aim + i);
    __m256d br = _mm256_loadu_pd(bre + i), bi = _mm256_loadu_pd(bim + i);
    r = _mm256_fmadd_pd(ar, br, r);
    r = _mm256_fnmadd_pd(ai, bi, r);
    m = _mm256_fmadd_pd(ar, bi, m);
    m = _mm256_fmadd_pd(ai, br, m);
  }
  double tr = hsum(r), tm = hsum(m);
  for (; i < n; ++i) {
    tr += are[i] * bre[i] - aim[i] * bim[i];
    tm += are[i] * bim[i] + aim[i] * bre[i];
  }
  *re = tr;
  *im = tm;
}

}  // namespace

const Table& avx2_table() {
  static const Table t{"avx2", dot_avx2, dot2_avx2, cdot_avx2};
  return t;
}

}  // namespace weyl::kernels
