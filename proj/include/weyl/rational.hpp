#pragma once

#include <gmpxx.h>

#include <complex>
#include <compare>
#include <cstdint>
#include <numeric>
#include <string>

#include "weyl/error.hpp"

namespace weyl {

using Rational = mpq_class;

/// Parses "p", "-p/q" or a decimal literal such as "0.25" into an exact rational.
Rational parse_rational(const std::string& text);

std::string to_string(const Rational& q);

/// Exact a + b·i with arbitrary-precision rational parts.
struct GaussRational {
  Rational re;
  Rational im;

  GaussRational() : re(0), im(0) {}
  GaussRational(Rational r) : re(std::move(r)), im(0) {}  // NOLINT: implicit by design of arithmetic
  GaussRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
  GaussRational(long v) : re(v), im(0) {}  // NOLINT

  static GaussRational i() { return {Rational(0), Rational(1)}; }

  bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }
  bool is_real() const { return sgn(im) == 0; }

  GaussRational conj() const { return {re, -im}; }

  GaussRational& operator+=(const GaussRational& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  GaussRational& operator-=(const GaussRational& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  GaussRational& operator*=(const GaussRational& o) {
    Rational r = re * o.re - im * o.im;
    Rational m = re * o.im + im * o.re;
    re = std::move(r);
    im = std::move(m);
    return *this;
  }

  std::complex<double> to_complex() const { return {re.get_d(), im.get_d()}; }

  friend GaussRational operator+(GaussRational a, const GaussRational& b) { return a += b; }
  friend GaussRational operator-(GaussRational a, const GaussRational& b) { return a -= b; }
  friend GaussRational operator*(GaussRational a, const GaussRational& b) { return a *= b; }
  friend GaussRational operator-(const GaussRational& a) { return {-a.re, -a.im}; }
  friend bool operator==(const GaussRational& a, const GaussRational& b) {
    return a.re == b.re && a.im == b.im;
  }
};

/// (-i)^n as an exact Gaussian rational.
GaussRational minus_i_pow(int n);

std::string to_string(const GaussRational& c);

/// Small exact rational exponent with denominator at most kMaxDenominator.
class Exponent {
 public:
  static constexpr std::int64_t kMaxDenominator = 64;

  constexpr Exponent() = default;
  Exponent(std::int64_t num, std::int64_t den = 1);  // NOLINT

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  /// Largest integer not above the exponent.
  std::int64_t floor() const;

  Rational to_rational() const { return Rational(num_, den_); }

  friend Exponent operator+(Exponent a, Exponent b) {
    return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
  }
  friend Exponent operator-(Exponent a, Exponent b) {
    return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
  }
  friend Exponent operator-(Exponent a) { return {-a.num_, a.den_}; }
  friend bool operator==(const Exponent&, const Exponent&) = default;
  friend std::strong_ordering operator<=>(const Exponent& a, const Exponent& b) {
    return a.num_ * b.den_ <=> b.num_ * a.den_;
  }

  std::string str() const;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

Exponent parse_exponent(const std::string& text);

}  // namespace weyl
