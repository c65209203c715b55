#include "doctest.h"
#include "weyl/parametrix.hpp"
#include "weyl/series_io.hpp"

using namespace weyl;

TEST_CASE("symbol files") {
  auto f = parse_symbol_file(
      "# shifted oscillator\n"
      "dim 1\n"
      "base a = 1 + x^2 + xi^2   # positive\n"
      "exp = a^(1/2)\n"
      "symbol = a^(1/2) + x\n");
  REQUIRE(f.symbol.has_value());
  CHECK(f.registry->dim() == 1);
  CHECK(f.registry->has_exp_symbol());
  CHECK(f.symbol->evaluate(PhasePoint::at(0, 0)).real() == doctest::Approx(1.0));

  CHECK_THROWS_AS(parse_symbol_file("dim 4\n"), Error);
  CHECK_THROWS_AS(parse_symbol_file("dim 1\nbase a 1 + x^2\n"), Error);
  CHECK_THROWS_AS(parse_symbol_file("dim 1\nsymbol = b^2\n"), Error);
  CHECK_THROWS_AS(parse_symbol_file("dim 1\nbase a = x^2 - 1\n"), Error);
  CHECK_THROWS_AS(parse_symbol_file("dim 1\nweird 3\n"), Error);
  try {
    parse_symbol_file("dim 1\n\nsymbol = x +\n");
  } catch (const Error& e) {
    CHECK(e.message().rfind("line 3:", 0) == 0);
  }
}

TEST_CASE("series files round trip exactly") {
  auto reg = Registry::create(1);
  SymExpr a = parse_expr(reg, "1 + x^2 + xi^2");
  reg->add_base("a", a);
  register_resolvent_bases(*reg, a, "a");
  reg->set_exp_symbol(parse_expr(reg, "a^(1/2)"));
  FormalSeries q = resolvent_parametrix(a, 4);
  std::string text = series_to_text(q);
  auto back = parse_series_text(text);
  REQUIRE(back.series.order() == 4);
  CHECK_FALSE(back.series.closed());
  CHECK(back.registry->has_exp_symbol());
  CHECK(series_to_text(back.series) == text);
  auto w = PhasePoint::at(0.3, -1.0, 2.0);
  for (int j = 0; j < 4; ++j) CHECK(std::abs(back.series.term(j).evaluate(w) - q.term(j).evaluate(w)) < 1e-15);

  CHECK_THROWS_AS(parse_series_text("weyl-series 2\n"), Error);
  CHECK_THROWS_AS(parse_series_text("weyl-series 1\ndim 1\nclosed 0\nbegin term 1\nend\n"), Error);
  CHECK_THROWS_AS(parse_series_text("weyl-series 1\ndim 1\nclosed 0\nbegin term 0\n"), Error);
}

TEST_CASE("series files merge into one registry") {
  auto reg = Registry::create(1);
  SymExpr a = parse_expr(reg, "1 + x^2 + xi^2");
  reg->add_base("a", a);
  FormalSeries q = parametrix(a, 3);
  std::string text = series_to_text(q);
  auto first = parse_series_text(text);
  auto second = parse_series_text(text, first.registry);
  CHECK(first.registry->num_bases() == 1);
  FormalSeries prod = sharp(first.series, second.series, 3);
  CHECK(prod.order() == 3);

  auto other = Registry::create(1);
  other->add_base("a", parse_expr(other, "2 + x^2"));
  CHECK_THROWS_AS(parse_series_text(series_to_text(FormalSeries::symbol(parse_expr(other, "a"))), first.registry), Error);
  CHECK_THROWS_AS(parse_series_text(text, Registry::create(2)), Error);
}
