#include "weyl/quant.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "weyl/kernels.hpp"

namespace weyl {

namespace {

double hermitian_defect(const CMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

void require_d1(const SymExpr& s) {
  const Registry& reg = *s.registry();
  if (reg.dim() != 1) throw Error(ErrorKind::UnsupportedSymbol, "Hermite quantization is one-dimensional");
  for (int v : {reg.var_lambda(), reg.var_mu(), reg.var_t()})
    if (s.depends_on(v)) throw Error(ErrorKind::UnsupportedSymbol, "symbol depends on " + reg.var_name(v));
}

}  // namespace

CMatrix position_matrix(int n) {
  CMatrix x = CMatrix::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) x(k, k + 1) = x(k + 1, k) = std::sqrt((k + 1) / 2.0);
  return x;
}

CMatrix momentum_matrix(int n) {
  CMatrix p = CMatrix::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) {
    double s = std::sqrt((k + 1) / 2.0);
    p(k, k + 1) = cplx(0.0, -s);
    p(k + 1, k) = cplx(0.0, s);
  }
  return p;
}

HermiteOperator quantize_poly(const SymExpr& sigma, int n_basis, int n_pad) {
  if (n_basis < 1) throw Error(ErrorKind::InvalidParameter, "n_basis must be >= 1");
  if (!sigma.is_polynomial()) throw Error(ErrorKind::UnsupportedSymbol, "quantize_poly needs a polynomial symbol");
  require_d1(sigma);
  const Registry& reg = *sigma.registry();
  const int vx = reg.var_x(0), vxi = reg.var_xi(0);
  int deg = 0;
  for (const auto& [k, c] : sigma.terms()) deg = std::max(deg, k.mono.e[vx] + k.mono.e[vxi]);
  if (deg > 10) throw Error(ErrorKind::UnsupportedSymbol, "polynomial degree above 10");
  const int need = n_basis + 2 * deg;
  if (n_pad <= 0) n_pad = need;
  if (n_pad < need) throw Error(ErrorKind::InvalidParameter, "n_pad must be >= n_basis + 2 deg");

  const CMatrix X = position_matrix(n_pad), P = momentum_matrix(n_pad);
  std::vector<CMatrix> xp{CMatrix::Identity(n_pad, n_pad)}, pp{CMatrix::Identity(n_pad, n_pad)};
  for (int i = 1; i <= deg; ++i) {
    xp.push_back(xp.back() * X);
    pp.push_back(pp.back() * P);
  }
  CMatrix acc = CMatrix::Zero(n_pad, n_pad);
  bool real = true;
  for (const auto& [k, c] : sigma.terms()) {
    const int m = k.mono.e[vx], n = k.mono.e[vxi];
    real = real && c.is_real();
    // Op_W(x^m xi^n) = 2^{-m} sum_j binom(m, j) X^j P^n X^{m-j}
    CMatrix term = CMatrix::Zero(n_pad, n_pad);
    double binom = 1.0;
    for (int j = 0; j <= m; ++j) {
      term += binom * (xp[static_cast<std::size_t>(j)] * pp[static_cast<std::size_t>(n)] * xp[static_cast<std::size_t>(m - j)]);
      binom = binom * (m - j) / (j + 1);
    }
    acc += c.to_complex() * std::ldexp(1.0, -m) * term;
  }
  HermiteOperator out;
  out.matrix = acc.topLeftCorner(n_basis, n_basis);
  out.n_pad = n_pad;
  out.hermitian_flag = real;
  return out;
}

// ---------------------------------------------------------------- Wigner pairing

namespace {

// R_{n,k}(r) = ((-1)^n / pi) sqrt(n!/(n+k)!) (sqrt2 r)^k e^{-r^2} L_n^{(k)}(2 r^2),
// the radial factor of W_{n,n+k}(x, xi) = R_{n,k}(r) e^{i k theta}.
// Fills out[n] for n < count.
void radial_factors(double r, int k, int count, double* out) {
  const double x = 2.0 * r * r;
  double l0 = r > 0.0 ? std::exp(k * std::log(std::sqrt(2.0) * r) - r * r - 0.5 * std::lgamma(k + 1.0))
                      : (k == 0 ? 1.0 : 0.0);
  double lm1 = 0.0;
  double sign = 1.0 / std::numbers::pi;
  for (int n = 0; n < count; ++n) {
    out[n] = sign * l0;
    double next = ((2.0 * n + 1.0 + k - x) * l0 - std::sqrt(static_cast<double>(n) * (n + k)) * lm1) /
                  std::sqrt((n + 1.0) * (n + 1.0 + k));
    lm1 = l0;
    l0 = next;
    sign = -sign;
  }
}

}  // namespace

HermiteOperator quantize_general(const std::function<cplx(double, double)>& sigma, int n_basis,
                                 const WignerQuadrature& quad) {
  if (n_basis < 1) throw Error(ErrorKind::InvalidParameter, "n_basis must be >= 1");
  if (quad.nodes_per_state < 2) throw Error(ErrorKind::InvalidParameter, "nodes_per_state must be >= 2");
  const int nr = quad.nodes_per_state * n_basis, nt = quad.nodes_per_state * n_basis;
  const double rmax = std::sqrt(2.0 * n_basis) + quad.window_margin;
  const GaussRule rule = gauss_legendre(nr, 0.0, rmax);
  const int K = n_basis;  // |m - n| < K

  // angular moments S_k(r_i) = \int sigma(r, theta) e^{i k theta} dtheta, k in (-K, K)
  std::vector<std::vector<double>> s_re(static_cast<std::size_t>(2 * K - 1), std::vector<double>(static_cast<std::size_t>(nr))),
      s_im = s_re;
  std::vector<cplx> samples(static_cast<std::size_t>(nt));
  std::vector<cplx> phase(static_cast<std::size_t>(nt));
  const double dth = 2.0 * std::numbers::pi / nt;
  for (int l = 0; l < nt; ++l) phase[static_cast<std::size_t>(l)] = std::polar(1.0, l * dth);
  for (int i = 0; i < nr; ++i) {
    const double r = rule.nodes[static_cast<std::size_t>(i)];
    for (int l = 0; l < nt; ++l) {
      cplx v = sigma(r * phase[static_cast<std::size_t>(l)].real(), r * phase[static_cast<std::size_t>(l)].imag());
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw Error(ErrorKind::NumericalFailure, "symbol is not finite on the quadrature grid");
      samples[static_cast<std::size_t>(l)] = v;
    }
    for (int k = -(K - 1); k <= K - 1; ++k) {
      cplx s = 0.0;
      const int step = ((k % nt) + nt) % nt;
      int idx = 0;
      for (int l = 0; l < nt; ++l) {
        s += samples[static_cast<std::size_t>(l)] * phase[static_cast<std::size_t>(idx)];
        idx += step;
        if (idx >= nt) idx -= nt;
      }
      s *= dth;
      s_re[static_cast<std::size_t>(k + K - 1)][static_cast<std::size_t>(i)] = s.real();
      s_im[static_cast<std::size_t>(k + K - 1)][static_cast<std::size_t>(i)] = s.imag();
    }
  }

  // radial factors weighted by r dr: rad[k][n][i]
  std::vector<std::vector<std::vector<double>>> rad(static_cast<std::size_t>(K));
  std::vector<double> buf(static_cast<std::size_t>(n_basis));
  for (int k = 0; k < K; ++k) {
    const int count = n_basis - k;
    rad[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(count), std::vector<double>(static_cast<std::size_t>(nr)));
    for (int i = 0; i < nr; ++i) {
      const double r = rule.nodes[static_cast<std::size_t>(i)];
      radial_factors(r, k, count, buf.data());
      for (int n = 0; n < count; ++n)
        rad[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] =
            buf[static_cast<std::size_t>(n)] * r * rule.weights[static_cast<std::size_t>(i)];
    }
  }

  const auto& kern = kernels::active();
  HermiteOperator out;
  out.matrix.resize(n_basis, n_basis);
  out.n_pad = n_basis;
  bool real = true;
  for (int m = 0; m < n_basis; ++m)
    for (int n = 0; n < n_basis; ++n) {
      const int k = m - n, lo = std::min(m, n), ak = std::abs(k);
      const auto& R = rad[static_cast<std::size_t>(ak)][static_cast<std::size_t>(lo)];
      double re, im;
      kern.dot2(R.data(), s_re[static_cast<std::size_t>(k + K - 1)].data(), s_im[static_cast<std::size_t>(k + K - 1)].data(),
                static_cast<std::size_t>(nr), &re, &im);
      out.matrix(m, n) = cplx(re, im);
    }
  // window check: \iint W_{n,n} = 1 for every state
  double tail = 0.0;
  for (int n = 0; n < n_basis; ++n) {
    double s = 0.0;
    for (int i = 0; i < nr; ++i) s += rad[0][static_cast<std::size_t>(n)][static_cast<std::size_t>(i)];
    tail = std::max(tail, std::fabs(2.0 * std::numbers::pi * s - 1.0));
  }
  out.accuracy_warning = tail > 1e-8;
  for (int l = 0; l < 4 && real; ++l) {
    double th = 0.37 + 1.3 * l;
    real = std::fabs(sigma(std::cos(th), std::sin(th)).imag()) == 0.0;
  }
  out.hermitian_flag = real && hermitian_defect(out.matrix) <= 1e-9 * std::max(1.0, out.matrix.cwiseAbs().maxCoeff());
  return out;
}

HermiteOperator quantize_general(const SymExpr& sigma, int n_basis, const WignerQuadrature& quad) {
  require_d1(sigma);
  CompiledExpr f(sigma);
  return quantize_general([&](double x, double xi) { return f(PhasePoint::at(x, xi)); }, n_basis, quad);
}

// ---------------------------------------------------------------- functional calculus

HermiteOperator matrix_function(const HermiteOperator& a, const std::function<cplx(double)>& f) {
  const double scale = std::max(1.0, a.matrix.cwiseAbs().maxCoeff());
  if (hermitian_defect(a.matrix) > 1e-10 * scale) throw Error(ErrorKind::InvalidInput, "matrix_function needs a hermitian matrix");
  CMatrix herm = 0.5 * (a.matrix + a.matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NumericalFailure, "eigendecomposition failed");
  Eigen::VectorXcd fv(es.eigenvalues().size());
  bool real = true;
  for (Eigen::Index i = 0; i < fv.size(); ++i) {
    fv(i) = f(es.eigenvalues()(i));
    real = real && fv(i).imag() == 0.0;
  }
  HermiteOperator out;
  out.matrix = es.eigenvectors() * fv.asDiagonal() * es.eigenvectors().adjoint();
  out.n_pad = a.n_pad;
  out.hermitian_flag = real;
  return out;
}

HermiteOperator balakrishnan_matrix(const HermiteOperator& a, cplx z, int k, const QuadratureScheme& quad) {
  quad.validate();
  const cplx gk = gamma_k(z, k);
  const int n = a.n_basis();
  const CMatrix& A = a.matrix;
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if (hermitian_defect(A) > 1e-10 * scale) throw Error(ErrorKind::InvalidInput, "balakrishnan_matrix needs a hermitian matrix");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (A + A.adjoint()), Eigen::EigenvaluesOnly);
  const double emin = es.eigenvalues().minCoeff(), emax = es.eigenvalues().maxCoeff();
  if (!(emin > 0.0)) throw Error(ErrorKind::InvalidInput, "balakrishnan_matrix needs a positive definite matrix");

  // bounds as in the scalar quadrature: e^{Re z u} below, e^{(Re z - k) u} above
  const double zr = z.real();
  double lo = quad.u_min, hi = quad.u_max;
  auto tail = [](double dist, double rate) { return std::exp(-rate * dist) / rate; };
  for (int i = 0; i < 100 && tail(std::max(0.0, std::log(emin) - lo), zr) > 1e-17; ++i) lo -= 10.0;
  for (int i = 0; i < 100 && tail(std::max(0.0, hi - std::log(emax)), k - zr) > 1e-17; ++i) hi += 10.0;

  const long nc = static_cast<long>(std::ceil((hi - lo) / quad.step));
  const long nn = nc * (1L << quad.refine);
  const double h = (hi - lo) / static_cast<double>(nn);
  CMatrix fine = CMatrix::Zero(n, n);
  const CMatrix I = CMatrix::Identity(n, n);
  for (long i = 0; i <= nn; ++i) {
    const double u = lo + static_cast<double>(i) * h, lam = std::exp(u);
    Eigen::PartialPivLU<CMatrix> lu(A + lam * I);
    CMatrix m = lu.solve(A);  // (A + lambda)^{-1} A, no cancellation at large lambda
    if (!m.allFinite()) throw Error(ErrorKind::NumericalFailure, "singular resolvent at lambda = " + std::to_string(lam));
    CMatrix mk = m;
    for (int p = 1; p < k; ++p) mk = mk * m;
    const cplx w = ((i == 0 || i == nn) ? 0.5 : 1.0) * h * std::exp(z * u);
    fine += w * mk;
  }
  HermiteOperator out;
  out.matrix = gk * fine;
  out.n_pad = a.n_pad;
  out.hermitian_flag = z.imag() == 0.0 && a.hermitian_flag;
  return out;
}

SpectralReport spectral_compare(const HermiteOperator& a, const HermiteOperator& b, int first, int last) {
  if (a.n_basis() != b.n_basis()) throw Error(ErrorKind::InvalidInput, "spectral_compare needs equal basis sizes");
  if (first < 0 || last >= a.n_basis() || first > last) throw Error(ErrorKind::InvalidParameter, "state range outside the basis");
  SpectralReport rep;
  rep.first = first;
  rep.last = last;
  const CMatrix diff = a.matrix - b.matrix;
  for (int n = first; n <= last; ++n) {
    double den = a.matrix.col(n).norm();
    double num = diff.col(n).norm();
    rep.state_error.push_back(den > 0.0 ? num / den : (num > 0.0 ? INFINITY : 0.0));
  }
  const int len = last - first + 1;
  Eigen::JacobiSVD<CMatrix> svd(diff.block(first, first, len, len));
  rep.block_norm = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  rep.max_error = *std::max_element(rep.state_error.begin(), rep.state_error.end());
  std::vector<double> s = rep.state_error;
  std::sort(s.begin(), s.end());
  rep.median_error = s.size() % 2 ? s[s.size() / 2] : 0.5 * (s[s.size() / 2 - 1] + s[s.size() / 2]);
  return rep;
}

// ---------------------------------------------------------------- IO

namespace {
constexpr char kMagic[8] = {'W', 'E', 'Y', 'L', 'M', 'A', 'T', '1'};
}

void write_matrix_binary(const HermiteOperator& a, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path);
  std::int64_t head[3] = {a.n_basis(), a.n_pad, (a.hermitian_flag ? 1 : 0) | (a.accuracy_warning ? 2 : 0)};
  out.write(kMagic, sizeof kMagic);
  out.write(reinterpret_cast<const char*>(head), sizeof head);
  for (int r = 0; r < a.n_basis(); ++r)
    for (int c = 0; c < a.n_basis(); ++c) {
      double v[2] = {a.matrix(r, c).real(), a.matrix(r, c).imag()};
      out.write(reinterpret_cast<const char*>(v), sizeof v);
    }
}

HermiteOperator read_matrix_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot read " + path);
  char magic[8];
  std::int64_t head[3];
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(head), sizeof head);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw Error(ErrorKind::InvalidInput, path + " is not a matrix file");
  if (head[0] < 1 || head[0] > 1 << 14) throw Error(ErrorKind::InvalidInput, path + ": bad dimension");
  HermiteOperator a;
  const int n = static_cast<int>(head[0]);
  a.matrix.resize(n, n);
  a.n_pad = static_cast<int>(head[1]);
  a.hermitian_flag = head[2] & 1;
  a.accuracy_warning = head[2] & 2;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      double v[2];
      in.read(reinterpret_cast<char*>(v), sizeof v);
      a.matrix(r, c) = cplx(v[0], v[1]);
    }
  if (!in) throw Error(ErrorKind::InvalidInput, path + ": truncated matrix data");
  return a;
}

void write_matrix_csv(const HermiteOperator& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path);
  out << "row,col,re,im\n";
  out.precision(17);
  for (int r = 0; r < a.n_basis(); ++r)
    for (int c = 0; c < a.n_basis(); ++c) out << r << ',' << c << ',' << a.matrix(r, c).real() << ',' << a.matrix(r, c).imag() << '\n';
}

}  // namespace weyl
