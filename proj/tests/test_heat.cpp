#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "weyl/heat.hpp"
#include "weyl/numerics.hpp"

using namespace weyl;

namespace {

struct Quadratic {
  std::shared_ptr<Registry> reg = Registry::create(1);
  SymExpr b{reg};
  Quadratic() {
    b = parse_expr(reg, "x^2 + xi^2");
    reg->set_exp_symbol(b);
  }
  SymExpr operator()(const std::string& s) const { return parse_expr(reg, s); }
};

mpz_class binom(int n, int k) {
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return r;
}

}  // namespace

TEST_CASE("heat terms for the oscillator") {
  Quadratic q;
  auto terms = heat_terms(q.b, 5);
  REQUIRE(terms.size() == 5);
  CHECK(terms[0].u == q("exp"));
  CHECK(terms[1].u.is_zero());
  CHECK((terms[2].u - q("(1/3*t^3*(x^2 + xi^2) - 1/2*t^2)*exp")).vanishes_identically());
  auto ref = oracle::heat(q.b, 5);
  for (int j = 0; j < 5; ++j) CHECK((terms[static_cast<std::size_t>(j)].u - ref[static_cast<std::size_t>(j)]).vanishes_identically());
  for (int j = 0; j < 5; ++j) CHECK(pde_residual(terms, j).vanishes_identically());
  const int vt = q.reg->var_t();
  CHECK(terms[0].Q.set_zero(vt) == q("1"));
  for (int j = 1; j < 5; ++j) CHECK(terms[static_cast<std::size_t>(j)].Q.set_zero(vt).is_zero());
}

TEST_CASE("heat terms for a square-root symbol") {
  auto reg = Registry::create(1);
  reg->add_base("a", parse_expr(reg, "1 + x^2 + xi^2"));
  SymExpr b = parse_expr(reg, "a^(1/2)");
  reg->set_exp_symbol(b);
  auto terms = heat_terms(b, 4);
  CHECK(terms[1].u.is_zero());
  for (int j = 0; j < 4; ++j) CHECK(pde_residual(terms, j).vanishes_identically());
  auto ref = oracle::heat(b, 4);
  for (int j = 0; j < 4; ++j) CHECK((terms[static_cast<std::size_t>(j)].u - ref[static_cast<std::size_t>(j)]).vanishes_identically());
  // a wrong u_2 leaves a non-zero residual
  auto broken = terms;
  broken[2].u = broken[2].u * GaussRational(2);
  CHECK_FALSE(pde_residual(broken, 2).vanishes_identically());
}

TEST_CASE("heat terms need the registered exponential symbol") {
  Quadratic q;
  CHECK_THROWS_AS(heat_terms(q("x^2 + 2*xi^2"), 3), Error);
  auto bare = Registry::create(1);
  CHECK_THROWS_AS(heat_terms(parse_expr(bare, "x^2"), 3), Error);
}

TEST_CASE("resummed heat symbol") {
  Quadratic q;
  auto terms = heat_terms(q.b, 3);
  auto cfg = CutoffConfig::from_weights(make_gevrey(2.0, 20), 4.0);
  for (double x : {0.0, 1.0, 30.0}) CHECK(std::abs(heat_evaluate(terms, 0.0, PhasePoint::at(x, 0.5), cfg) - 1.0) < 1e-15);
  CHECK(std::abs(heat_evaluate(terms, 1.0, PhasePoint::at(0, 0), cfg) - 1.0) < 1e-15);
  // outside every cutoff shell the plain partial sum is returned
  auto far = PhasePoint::at(200.0, 0.0);
  far.t = 1e-4;
  cplx partial = 0.0;
  for (const auto& t : terms) partial += t.u.evaluate(far);
  CHECK(std::abs(heat_evaluate(terms, 1e-4, far, cfg) - partial) <= 1e-12 * std::abs(partial));
}

TEST_CASE("derivative bound profiles") {
  Quadratic q;
  auto terms = heat_terms(q.b, 3);
  std::vector<PhasePoint> grid;
  for (double r : {0.0, 1.0, 3.0, 8.0, 19.0})
    for (double th : {0.1, 1.9, 4.0}) grid.push_back(PhasePoint::at(r * std::cos(th), r * std::sin(th)));
  std::vector<double> ts{0.0, 0.5, 1.0, 2.5, 5.0};
  auto A = make_gevrey(1.0, 20);
  auto leading = bound_profile({terms[0]}, grid, ts, 0, 0, A, 1.0);
  // j = n = |alpha| = 0: ratio = e^{-3t Re b / 4} <= 1
  CHECK(leading.heat.C <= 1.0 + 1e-15);
  CHECK(leading.heat.C == doctest::Approx(1.0));
  auto full = bound_profile(terms, grid, ts, 2, 2, A, 1.0);
  CHECK(std::isfinite(full.heat.C));
  CHECK(std::isfinite(full.heat.h));
  CHECK(full.heat.skipped > 0);  // origin excluded for n > 0
  CHECK(std::isfinite(full.exp_bound.C));
  CHECK(std::isfinite(full.power_bound.C));
  CHECK_THROWS_AS(bound_profile(terms, grid, ts, 5, 0, A, 1.0), Error);
}

TEST_CASE("Faa di Bruno sets and bound") {
  // d = 1: sum_r binom(n, r) * #compositions(n, r) = binom(2n - 1, n)
  for (int n = 1; n <= 8; ++n) CHECK(faa_di_bruno_bound_lhs({n}) == binom(2 * n - 1, n));
  // p((2), 1) = {(2)}, p((2), 2) = {(1) x 2}
  auto s1 = faa_di_bruno_sets({2}, 1), s2 = faa_di_bruno_sets({2}, 2);
  REQUIRE(s1.size() == 1);
  CHECK(s1[0].parts == std::vector<std::vector<int>>{{2}});
  REQUIRE(s2.size() == 1);
  CHECK(s2[0].mult == std::vector<int>{2});
  CHECK(faa_di_bruno_sets({1, 1}, 2).size() == 1);
  CHECK(faa_di_bruno_sets({1, 1}, 1).size() == 1);
  CHECK(faa_di_bruno_sets({2, 1}, 2).size() == 2);
  for (int d = 1; d <= 3; ++d)
    for (int order = 1; order <= 6; ++order)
      for (const auto& beta : multi_indices(d, order)) {
        mpz_class bound = 1;
        bound <<= static_cast<mp_bitcnt_t>(order * (d + 1));
        CHECK(faa_di_bruno_bound_lhs(beta) <= bound);
      }
}

TEST_CASE("Faa di Bruno expansion of the exponential matches differentiation") {
  auto reg = Registry::create(1);
  reg->add_base("a", parse_expr(reg, "1 + x^2 + 2*xi^2"));
  reg->set_exp_symbol(parse_expr(reg, "a^(1/2) + x*xi"));
  const int n = reg->num_vars();
  for (int ax = 0; ax <= 2; ++ax)
    for (int axi = 0; ax + axi <= 3; ++axi) {
      std::vector<int> counts(static_cast<std::size_t>(n), 0);
      counts[static_cast<std::size_t>(reg->var_x(0))] = ax;
      counts[static_cast<std::size_t>(reg->var_xi(0))] = axi;
      SymExpr direct = oracle::derive(SymExpr::exp_atom(reg), {axi}, {ax});
      CHECK((faa_di_bruno_exp(reg, counts) - direct).vanishes_identically());
    }
}
