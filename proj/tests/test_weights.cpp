#include <cmath>
#include <fstream>

#include "doctest.h"
#include "weyl/weights.hpp"
#include "weyl/error.hpp"

using namespace weyl;

namespace {

// sup_p ln_+(rho^p / M_p) by direct summation of logs
double brute_associated(double sigma, int p_max, double rho) {
  double best = 0.0;
  for (int p = 0; p <= p_max; ++p) {
    double lm = 0.0;
    for (int k = 2; k <= p; ++k) lm += sigma * std::log(k);
    best = std::max(best, p * std::log(rho) - lm);
  }
  return best;
}

}  // namespace

TEST_CASE("Gevrey tables") {
  CHECK(make_gevrey(2.0).M(3) == doctest::Approx(36.0));
  CHECK(make_gevrey(1.0).M(0) == doctest::Approx(1.0));
  CHECK(make_gevrey(1.0).M(1) == doctest::Approx(1.0));
  CHECK(make_gevrey(2.0).M(5) == doctest::Approx(14400.0).epsilon(1e-12));
  CHECK(make_gevrey(2.0).m(4) == doctest::Approx(16.0));
  CHECK_THROWS_AS(make_gevrey(0.0), Error);
  CHECK_THROWS_AS(make_gevrey(-1.0), Error);
}

TEST_CASE("condition report for Gevrey and degenerate sequences") {
  for (int pmax : {50, 200}) {
    auto r = check_conditions(make_gevrey(2.0, pmax));
    CHECK(r.holds_M1);
    CHECK(r.holds_M2);
    CHECK(r.holds_M3prime);
    CHECK(r.holds_M3);
    CHECK(r.holds_M4);
  }
  auto flat = check_conditions(WeightSequence(std::vector<double>(51, 0.0)));
  CHECK(flat.holds_M1);
  CHECK_FALSE(flat.holds_M3prime);
  CHECK(flat.witness_M3prime.has_value());

  auto fact = check_conditions(make_gevrey(1.0, 50));
  CHECK(fact.holds_M4);

  // a dent in log-convexity is reported with its index
  std::vector<double> lv = make_gevrey(2.0, 40).log_values();
  lv[20] += 5.0;
  auto dent = check_conditions(WeightSequence(lv));
  CHECK_FALSE(dent.holds_M1);
  REQUIRE(dent.witness_M1.has_value());
  CHECK(std::abs(dent.witness_M1->first - 20) <= 1);
}

TEST_CASE("associated function") {
  CHECK(associated_function(make_gevrey(1.0, 80), 1.0).value == 0.0);
  double m20 = associated_function(make_gevrey(1.0, 80), 20.0).value;
  CHECK(m20 == doctest::Approx(brute_associated(1.0, 80, 20.0)).epsilon(1e-10));
  CHECK(std::abs(m20 - 20.0) <= 0.15 * 20.0);
  auto g2 = make_gevrey(2.0, 200);
  for (double rho = 1e2; rho <= 1e4; rho *= 10.0) {  // argmax near sqrt(rho)
    auto v = associated_function(g2, rho);
    CHECK_FALSE(v.boundary_hit);
    double ratio = v.value / std::sqrt(rho);
    CHECK(ratio >= 0.5);
    CHECK(ratio <= 2.0);
  }
  CHECK(associated_function(make_gevrey(1.0, 10), 1e6).boundary_hit);
  CHECK_THROWS_AS(associated_function(g2, 0.0), Error);
}

TEST_CASE("shifted associated function") {
  auto f = make_gevrey(1.0, 80);
  std::vector<double> r;
  for (int p = 1; p <= 80; ++p) r.push_back(p);
  double shifted = associated_function_shifted(f, SubordinateSequence(r), 10.0).value;
  CHECK(shifted == doctest::Approx(associated_function(make_gevrey(2.0, 80), 10.0).value).epsilon(1e-12));

  std::vector<double> slow;
  for (int p = 1; p <= 80; ++p) slow.push_back(1.0 + p / 80.0);
  for (double rho : {0.5, 3.0, 30.0, 300.0})
    CHECK(associated_function_shifted(f, SubordinateSequence(slow), rho).value <= associated_function(f, rho).value + 1e-12);
  CHECK_THROWS_AS(SubordinateSequence({2.0, 1.0}), Error);
}

TEST_CASE("sequence lemmas") {
  CHECK_FALSE(check_binomial_lemma(make_gevrey(2.0, 40), 30).has_value());
  CHECK_FALSE(check_product_lemma(make_gevrey(2.0, 40), 12).has_value());
  CHECK_FALSE(check_product_lemma(make_gevrey(1.0, 40), 10).has_value());
  // a sequence growing too slowly breaks the product inequality
  std::vector<double> lv(21);
  for (int p = 0; p <= 20; ++p) lv[static_cast<std::size_t>(p)] = std::log(std::max(p, 1));
  auto v = check_product_lemma(WeightSequence(lv), 6);
  CHECK(v.has_value());
}

TEST_CASE("weight files") {
  const std::string path = "weights_test.txt";
  {
    std::ofstream out(path);
    out << "# ln p!\n";
    for (int p = 0; p <= 30; ++p) out << p << ' ' << std::lgamma(p + 1.0) << '\n';
  }
  auto w = load_weight_sequence(path);
  CHECK(w.p_max() == 30);
  CHECK(w.M(5) == doctest::Approx(120.0));
  {
    std::ofstream out(path);
    out << "0 0\n1 0\n3 1\n";
  }
  CHECK_THROWS_AS(load_weight_sequence(path), Error);
  std::remove(path.c_str());
}
