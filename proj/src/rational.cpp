#include "weyl/rational.hpp"

#include <cctype>

namespace weyl {

Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw Error(ErrorKind::InvalidInput, "empty rational literal");
  try {
    auto dot = s.find('.');
    if (dot != std::string::npos) {
      bool neg = s[0] == '-';
      std::string body = (s[0] == '-' || s[0] == '+') ? s.substr(1) : s;
      dot = body.find('.');
      std::string digits = body.substr(0, dot) + body.substr(dot + 1);
      std::size_t frac_len = body.size() - dot - 1;
      if (digits.empty()) throw Error(ErrorKind::InvalidInput, "bad decimal '" + text + "'");
      mpz_class num(digits, 10);
      mpz_class den;
      mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_len);
      Rational q(num, den);
      q.canonicalize();
      return neg ? Rational(-q) : q;
    }
    Rational q(s[0] == '+' ? s.substr(1) : s, 10);
    if (q.get_den() == 0) throw Error(ErrorKind::InvalidInput, "zero denominator in '" + text + "'");
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw Error(ErrorKind::InvalidInput, "bad rational literal '" + text + "'");
  }
}

std::string to_string(const Rational& q) { return q.get_str(); }

GaussRational minus_i_pow(int n) {
  switch (((n % 4) + 4) % 4) {
    case 0: return GaussRational(1);
    case 1: return {Rational(0), Rational(-1)};
    case 2: return GaussRational(-1);
    default: return {Rational(0), Rational(1)};
  }
}

std::string to_string(const GaussRational& c) {
  if (c.is_real()) return c.re.get_str();
  if (sgn(c.re) == 0) return c.im.get_str() + "*i";
  return "(" + c.re.get_str() + (sgn(c.im) < 0 ? "" : "+") + c.im.get_str() + "*i)";
}

Exponent::Exponent(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorKind::InvalidInput, "exponent with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g == 0) g = 1;
  num_ = num / g;
  den_ = den / g;
  if (num_ == 0) den_ = 1;
  if (den_ > kMaxDenominator)
    throw Error(ErrorKind::UnsupportedOperation,
                "exponent denominator " + std::to_string(den_) + " exceeds 64");
}

std::int64_t Exponent::floor() const {
  if (num_ >= 0) return num_ / den_;
  return -((-num_ + den_ - 1) / den_);
}

std::string Exponent::str() const {
  return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

Exponent parse_exponent(const std::string& text) {
  Rational q = parse_rational(text);
  if (!q.get_num().fits_slong_p() || !q.get_den().fits_slong_p())
    throw Error(ErrorKind::UnsupportedOperation, "exponent too large: " + text);
  return {q.get_num().get_si(), q.get_den().get_si()};
}

}  // namespace weyl
