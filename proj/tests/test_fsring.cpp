#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "weyl/fsring.hpp"
#include "weyl/weights.hpp"

using namespace weyl;

namespace {

struct Osc {
  std::shared_ptr<Registry> reg = Registry::create(1);
  SymExpr a{reg};
  Osc() {
    a = parse_expr(reg, "1 + x^2 + xi^2");
    reg->add_base("a", a);
  }
  SymExpr operator()(const std::string& s) const { return parse_expr(reg, s); }
};

const GaussRational kHalfI(Rational(0), Rational(1, 2));

}  // namespace

TEST_CASE("x # xi") {
  Osc o;
  FormalSeries c = sharp(FormalSeries::symbol(o("x")), FormalSeries::symbol(o("xi")), 4);
  CHECK(c.term(0) == o("x*xi"));
  CHECK(c.term(1) == SymExpr::constant(o.reg, kHalfI));
  CHECK(c.term(2).is_zero());
  CHECK(c.term(3).is_zero());
}

TEST_CASE("unit of the ring") {
  Osc o;
  FormalSeries B(o.reg, {o("a^(1/2)*x"), o("xi*a^(-1)"), o("x^2")});
  FormalSeries c = sharp(FormalSeries::unit(o.reg), B, 3);
  for (int j = 0; j < 3; ++j) CHECK(c.term(j) == B.term(j));
  CHECK((sharp(B, FormalSeries::unit(o.reg), 3) - B).is_zero());
}

TEST_CASE("a # a against the enumeration oracle") {
  Osc o;
  FormalSeries c = sharp(FormalSeries::symbol(o.a), FormalSeries::symbol(o.a), 4);
  auto ref = oracle::sharp({o.a}, {o.a}, 4);
  for (int j = 0; j < 4; ++j) CHECK((c.term(j) - ref[static_cast<std::size_t>(j)]).is_zero());
  CHECK(c.term(0) == o.a * o.a);
  CHECK(c.term(1).is_zero());
  CHECK(c.term(2) == o("-1"));
}

TEST_CASE("sharp with base powers against the oracle in two dimensions") {
  auto reg = Registry::create(2);
  reg->add_base("b", parse_expr(reg, "1 + x1^2 + 2*xi2^2 + x2^2 + xi1^2"));
  SymExpr u = parse_expr(reg, "x1*b^(1/2) + xi2"), v = parse_expr(reg, "b^(-1)*xi1 + x2*x1");
  FormalSeries c = sharp(FormalSeries::symbol(u), FormalSeries::symbol(v), 3);
  auto ref = oracle::sharp({u}, {v}, 3);
  for (int j = 0; j < 3; ++j) CHECK((c.term(j) - ref[static_cast<std::size_t>(j)]).vanishes_identically());
}

TEST_CASE("sharp powers") {
  Osc o;
  FormalSeries A(o.reg, {o("x*xi + a^(1/2)"), o("xi")});
  CHECK((sharp_power(A, 1, 2) - A).is_zero());
  CHECK((sharp_power(A, 0, 2) - FormalSeries::unit(o.reg).truncated(2)).is_zero());
  CHECK((sharp_power(A, 3, 2) - sharp(A, sharp(A, A, 2), 2)).is_zero());
  CHECK_THROWS_AS(sharp(A, A, 3), Error);
}

TEST_CASE("associativity on random polynomial series") {
  Osc o;
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> c(-3, 3);
  auto poly = [&] {
    SymExpr p(o.reg);
    for (int i = 0; i <= 2; ++i)
      for (int k = 0; i + k <= 3; ++k)
        p += GaussRational(Rational(c(rng)), Rational(c(rng), 2)) *
             (SymExpr::variable(o.reg, 0, i) * SymExpr::variable(o.reg, 1, k));
    return p;
  };
  FormalSeries A(o.reg, {poly(), poly(), poly()}), B(o.reg, {poly(), poly(), poly()}), C(o.reg, {poly(), poly(), poly()});
  CHECK((sharp(sharp(A, B, 3), C, 3) - sharp(A, sharp(B, C, 3), 3)).is_zero());
  // the product is not commutative
  CHECK_FALSE((sharp(A, B, 3) - sharp(B, A, 3)).is_zero());
}

TEST_CASE("change of quantization") {
  Osc o;
  FormalSeries xxi = FormalSeries::symbol(o("x*xi"));
  FormalSeries same = change_quantization(xxi, Rational(1, 3), Rational(1, 3), 3);
  CHECK((same - xxi.truncated(3)).is_zero());

  FormalSeries p = change_quantization(xxi, Rational(0), Rational(1, 2), 3);
  CHECK(p.term(0) == o("x*xi"));
  CHECK(p.term(1) == SymExpr::constant(o.reg, -kHalfI));
  CHECK(p.term(2).is_zero());

  FormalSeries s(o.reg, {o("x*a^(1/2)"), o("xi^3*a^(-1)"), o("x*xi")});
  FormalSeries back = change_quantization(change_quantization(s, Rational(0), Rational(1, 2), 3), Rational(1, 2), Rational(0), 3);
  for (int j = 0; j < 3; ++j) CHECK((back.term(j) - s.term(j)).vanishes_identically());
}

TEST_CASE("cutoffs") {
  auto cfg = CutoffConfig::from_weights(make_gevrey(2.0, 20), 4.0);
  for (double x : {0.0, 3.0, 100.0}) CHECK(cutoff_chi(0, cfg, PhasePoint::at(x, 0.5)) == 0.0);
  for (int n = 1; n < 6; ++n) CHECK(cutoff_chi(n, cfg, PhasePoint::at(0, 0)) == 1.0);
  CHECK(cutoff_chi(1, cfg, PhasePoint::at(1e6, 0)) == 0.0);
  // psi is monotone and smooth across the shell
  double prev = 1.0;
  for (double s = 2.0; s <= 3.0; s += 0.01) {
    double v = cutoff_psi(s);
    CHECK(v <= prev + 1e-15);
    CHECK(v >= 0.0);
    prev = v;
  }
  CHECK(cutoff_psi(2.5) == doctest::Approx(0.5).epsilon(1e-12));
  CutoffConfig bad = cfg;
  bad.R = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("resummation") {
  Osc o;
  auto cfg = CutoffConfig::from_weights(make_gevrey(2.0, 20), 4.0);
  FormalSeries single = FormalSeries::symbol(o("a^(1/2)*x"));
  for (double x : {0.0, 2.0, 50.0}) {
    auto w = PhasePoint::at(x, 1.0);
    auto want = o("a^(1/2)*x").evaluate(w);
    CHECK(std::abs(resum_evaluate(single, cfg, w) - want) < 1e-14);
    CHECK(std::abs(resum_evaluate(single, cfg, w, ResumStrategy::SmallestTerm) - want) < 1e-14);
  }
  FormalSeries s(o.reg, {o("a"), o("1"), o("2*a^(-1)")});
  CHECK(resum_evaluate(s, cfg, PhasePoint::at(0, 0)).real() == doctest::Approx(1.0));
  // far out every cutoff is zero and the plain partial sum remains
  auto far = PhasePoint::at(500.0, 0.0);
  CHECK(resum_evaluate(s, cfg, far).real() == doctest::Approx(s.term(0).evaluate(far).real() + 1.0 + 2.0 / (1.0 + 250000.0)));
  // smallest-term sums up to, not including, the smallest term
  std::vector<std::complex<double>> vals{{8.0, 0}, {1.0, 0}, {0.25, 0}, {0.5, 0}};
  CHECK(resum_values(vals, cfg, far, ResumStrategy::SmallestTerm).real() == doctest::Approx(9.0));
}
