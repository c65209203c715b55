#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "weyl/kernels.hpp"

using namespace weyl;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// tolerance scaled by the sum of absolute products
double scale(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] * b[i]);
  return 1e-14 * (1.0 + s);
}

}  // namespace

TEST_CASE("scalar kernels") {
  const auto& k = kernels::scalar();
  std::vector<double> a{1, 2, 3}, b{4, -5, 6}, c{0.5, 0.5, 0.5};
  CHECK(k.dot(a.data(), b.data(), 3) == 12.0);
  double sa, sb;
  k.dot2(a.data(), b.data(), c.data(), 3, &sa, &sb);
  CHECK(sa == 12.0);
  CHECK(sb == 3.0);
  double re, im;
  // (1 + 4i)(2 + i) = -2 + 9i
  double ar[] = {1.0}, ai[] = {4.0}, br[] = {2.0}, bi[] = {1.0};
  k.cdot(ar, ai, br, bi, 1, &re, &im);
  CHECK(re == -2.0);
  CHECK(im == 9.0);
  CHECK(k.dot(a.data(), b.data(), 0) == 0.0);
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  const kernels::Table* fast = kernels::avx2();
  if (!fast) {
    MESSAGE("AVX2 variant unavailable, equivalence not exercised");
    return;
  }
  const auto& ref = kernels::scalar();
  std::mt19937_64 rng(7);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 31u, 64u, 257u, 1023u}) {
    auto x = random_vec(rng, n), a = random_vec(rng, n), b = random_vec(rng, n), c = random_vec(rng, n);
    CHECK(std::fabs(fast->dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= scale(a, b));

    double fa, fb, ra, rb;
    fast->dot2(x.data(), a.data(), b.data(), n, &fa, &fb);
    ref.dot2(x.data(), a.data(), b.data(), n, &ra, &rb);
    CHECK(std::fabs(fa - ra) <= scale(x, a));
    CHECK(std::fabs(fb - rb) <= scale(x, b));

    double fr, fi, rr, ri;
    fast->cdot(x.data(), a.data(), b.data(), c.data(), n, &fr, &fi);
    ref.cdot(x.data(), a.data(), b.data(), c.data(), n, &rr, &ri);
    CHECK(std::fabs(fr - rr) <= scale(x, b) + scale(a, c));
    CHECK(std::fabs(fi - ri) <= scale(x, c) + scale(a, b));
  }
}

TEST_CASE("active table is one of the variants") {
  const auto& act = kernels::active();
  CHECK((&act == &kernels::scalar() || &act == kernels::avx2()));
}
