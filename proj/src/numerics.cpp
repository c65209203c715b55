#include "weyl/numerics.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "weyl/error.hpp"

namespace weyl {

GaussRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw Error(ErrorKind::InvalidParameter, "Gauss-Legendre rule needs n >= 1");
  GaussRule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    auto lo = static_cast<std::size_t>(i), hi = static_cast<std::size_t>(n - 1 - i);
    r.nodes[lo] = mid - half * x;
    r.nodes[hi] = mid + half * x;
    r.weights[lo] = r.weights[hi] = half * w;
  }
  if (n == 1) {
    r.nodes[0] = mid;
    r.weights[0] = 2.0 * half;
  }
  return r;
}

cplx lgamma_complex(cplx z) {
  static constexpr std::array<double, 9> c = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  const double pi = std::numbers::pi;
  if (z.real() < 0.5) {
    // Gamma(z) Gamma(1-z) = pi / sin(pi z)
    cplx s = std::sin(pi * z);
    if (std::abs(s) == 0.0) throw Error(ErrorKind::InvalidParameter, "Gamma pole");
    return std::log(pi) - std::log(s) - lgamma_complex(1.0 - z);
  }
  z -= 1.0;
  cplx x = c[0];
  for (int i = 1; i < 9; ++i) x += c[static_cast<std::size_t>(i)] / (z + static_cast<double>(i));
  cplx t = z + 7.5;
  return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

cplx gamma_complex(cplx z) { return std::exp(lgamma_complex(z)); }

std::vector<std::vector<int>> multi_indices(int d, int order) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(d), 0);
  auto rec = [&](auto& self, int pos, int left) -> void {
    if (pos == d - 1) {
      cur[static_cast<std::size_t>(pos)] = left;
      out.push_back(cur);
      return;
    }
    for (int k = left; k >= 0; --k) {
      cur[static_cast<std::size_t>(pos)] = k;
      self(self, pos + 1, left - k);
    }
  };
  rec(rec, 0, order);
  return out;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

double multi_factorial(const std::vector<int>& alpha) {
  double f = 1.0;
  for (int a : alpha) f *= factorial(a);
  return f;
}

}  // namespace weyl
