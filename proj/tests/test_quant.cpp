#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "weyl/quant.hpp"

using namespace weyl;

namespace {

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

HermiteOperator from(const CMatrix& m) {
  HermiteOperator h;
  h.matrix = m;
  h.n_pad = static_cast<int>(m.rows());
  h.hermitian_flag = true;
  return h;
}

}  // namespace

TEST_CASE("polynomial quantization") {
  auto reg = Registry::create(1);
  CHECK(max_abs(quantize_poly(parse_expr(reg, "1"), 16).matrix - CMatrix::Identity(16, 16)) == 0.0);
  auto H = quantize_poly(parse_expr(reg, "x^2 + xi^2"), 32);
  CHECK(H.hermitian_flag);
  for (int n = 0; n < 32; ++n) CHECK(std::abs(H.matrix(n, n) - cplx(2.0 * n + 1)) < 1e-12);
  CHECK(max_abs(H.matrix - CMatrix(H.matrix.diagonal().asDiagonal())) < 1e-12);

  const int n = 20, pad = n + 4;
  CMatrix X = position_matrix(pad), P = momentum_matrix(pad);
  CMatrix sym = (0.5 * (X * P + P * X)).topLeftCorner(n, n);
  CHECK(max_abs(quantize_poly(parse_expr(reg, "x*xi"), n).matrix - sym) < 1e-12);
  // [X, P] = i away from the truncation edge
  CMatrix comm = (X * P - P * X).topLeftCorner(n, n);
  CHECK(max_abs(comm - cplx(0, 1) * CMatrix::Identity(n, n)) < 1e-12);

  CHECK_THROWS_AS(quantize_poly(parse_expr(reg, "x^2"), 8, 9), Error);
  reg->add_base("a", parse_expr(reg, "1 + x^2"));
  CHECK_THROWS_AS(quantize_poly(parse_expr(reg, "a^(1/2)"), 8), Error);
}

TEST_CASE("Wigner-pairing quantization") {
  auto reg = Registry::create(1);
  auto one = quantize_general([](double, double) { return cplx(1.0); }, 32);
  CHECK(max_abs(one.matrix - CMatrix::Identity(32, 32)) < 1e-10);
  CHECK_FALSE(one.accuracy_warning);

  SymExpr osc = parse_expr(reg, "x^2 + xi^2");
  auto a = quantize_general(osc, 40), b = quantize_poly(osc, 40);
  CHECK(max_abs((a.matrix - b.matrix).topLeftCorner(36, 36)) < 1e-8);

  // a non-radial, complex polynomial exercises every angular moment
  SymExpr mixed = parse_expr(reg, "x^3*xi - 2*i*x + xi^2*x^2 + 3");
  auto c = quantize_general(mixed, 24), d = quantize_poly(mixed, 24);
  CHECK(max_abs((c.matrix - d.matrix).topLeftCorner(20, 20)) < 1e-8);
  CHECK_FALSE(c.hermitian_flag);

  WignerQuadrature tight;
  tight.window_margin = 0.5;
  CHECK(quantize_general(osc, 32, tight).accuracy_warning);
  CHECK_THROWS_AS(quantize_general([](double, double) { return cplx(NAN); }, 4), Error);
}

TEST_CASE("functional calculus") {
  CMatrix d = CMatrix::Zero(6, 6);
  for (int n = 0; n < 6; ++n) d(n, n) = 2.0 * n + 1;
  auto A = from(d);
  CHECK(max_abs(matrix_function(A, [](double v) { return cplx(v); }).matrix - d) < 1e-12);
  auto r = matrix_function(A, [](double v) { return cplx(std::sqrt(v)); });
  auto e = matrix_function(A, [](double v) { return cplx(std::exp(-std::sqrt(v))); });
  for (int n = 0; n < 6; ++n) {
    CHECK(std::abs(r.matrix(n, n) - std::sqrt(2.0 * n + 1)) < 1e-12);
    CHECK(std::abs(e.matrix(n, n) - std::exp(-std::sqrt(2.0 * n + 1))) < 1e-14);
  }
  // f(U D U*) = U f(D) U* for a dense hermitian matrix
  CMatrix U = Eigen::HouseholderQR<CMatrix>(CMatrix::Random(6, 6)).householderQ();
  auto dense = matrix_function(from(U * d * U.adjoint()), [](double v) { return cplx(std::sqrt(v)); });
  CHECK(max_abs(dense.matrix * dense.matrix - U * d * U.adjoint()) < 1e-11);

  CMatrix nh = d;
  nh(0, 1) = 1.0;
  CHECK_THROWS_AS(matrix_function(from(nh), [](double v) { return cplx(v); }), Error);
}

TEST_CASE("Balakrishnan matrix integral") {
  auto id = balakrishnan_matrix(from(CMatrix::Identity(4, 4)), 0.5, 1);
  CHECK(max_abs(id.matrix - CMatrix::Identity(4, 4)) < 1e-9);
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 4.0;
  for (int k : {1, 2}) {
    auto r = balakrishnan_matrix(from(d), 0.5, k);
    CHECK(std::abs(r.matrix(0, 0) - 1.0) < 1e-8);
    CHECK(std::abs(r.matrix(1, 1) - 2.0) < 1e-8);
    CHECK(std::abs(r.matrix(0, 1)) < 1e-12);
  }
  auto c = balakrishnan_matrix(from(d), cplx(1.5, 0.3), 2);
  CHECK(std::abs(c.matrix(1, 1) - std::pow(cplx(4.0), cplx(1.5, 0.3))) < 1e-8);
  CMatrix sing = d;
  sing(0, 0) = 0.0;
  CHECK_THROWS_AS(balakrishnan_matrix(from(sing), 0.5, 1), Error);
}

TEST_CASE("spectral comparison") {
  auto reg = Registry::create(1);
  auto H = quantize_poly(parse_expr(reg, "x^2 + xi^2"), 24);
  auto same = spectral_compare(H, H, 0, 23);
  CHECK(same.max_error == 0.0);
  CHECK(same.block_norm == 0.0);
  // z = 1: the quantized leading symbol is the operator itself
  auto G = quantize_general([](double x, double xi) { return cplx(x * x + xi * xi); }, 24);
  auto rep = spectral_compare(H, G, 0, 20);
  CHECK(rep.max_error < 1e-8);
  CHECK(rep.state_error.size() == 21);
  CHECK_THROWS_AS(spectral_compare(H, H, 5, 30), Error);
}

TEST_CASE("matrix files") {
  auto reg = Registry::create(1);
  auto H = quantize_general(parse_expr(reg, "x*xi + i*x"), 8);
  write_matrix_binary(H, "m_test.bin");
  auto back = read_matrix_binary("m_test.bin");
  CHECK(back.matrix == H.matrix);
  CHECK(back.n_pad == H.n_pad);
  CHECK(back.hermitian_flag == H.hermitian_flag);
  write_matrix_csv(H, "m_test.csv");
  std::FILE* f = std::fopen("m_test.csv", "r");
  REQUIRE(f != nullptr);
  int lines = 0;
  for (int ch; (ch = std::fgetc(f)) != EOF;) lines += ch == '\n';
  std::fclose(f);
  CHECK(lines == 65);
  {
    std::FILE* g = std::fopen("m_test.bin", "wb");
    std::fputs("garbage", g);
    std::fclose(g);
  }
  CHECK_THROWS_AS(read_matrix_binary("m_test.bin"), Error);
  std::remove("m_test.bin");
  std::remove("m_test.csv");
}
