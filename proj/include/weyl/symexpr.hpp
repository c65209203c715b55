#pragma once

// Exact phase-space expressions: sums of
//   coefficient * x^a xi^b lambda^l mu^m t^n * prod_B B^{r_B} * [exp(-t*b)]
// over an append-only registry of positive base polynomials B and one
// designated exponential symbol b.

#include <array>
#include <complex>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "weyl/rational.hpp"

namespace weyl {

inline constexpr int kMaxDim = 3;
inline constexpr int kMaxVars = 2 * kMaxDim + 3;

struct Monomial {
  std::array<std::int16_t, kMaxVars> e{};

  friend auto operator<=>(const Monomial&, const Monomial&) = default;
  friend bool operator==(const Monomial&, const Monomial&) = default;

  int degree(int num_vars) const {
    int s = 0;
    for (int v = 0; v < num_vars; ++v) s += e[v];
    return s;
  }
};

struct BasePower {
  int base = 0;
  Exponent exp;

  friend auto operator<=>(const BasePower& a, const BasePower& b) {
    if (auto c = a.base <=> b.base; c != 0) return c;
    return a.exp <=> b.exp;
  }
  friend bool operator==(const BasePower&, const BasePower&) = default;
};

struct TermKey {
  Monomial mono;
  std::vector<BasePower> powers;  // sorted by base id, exponents non-zero
  bool exp_flag = false;

  friend auto operator<=>(const TermKey&, const TermKey&) = default;
  friend bool operator==(const TermKey&, const TermKey&) = default;
};

using TermMap = std::map<TermKey, GaussRational>;

/// Point of R^{2d} x parameter space at which expressions are evaluated.
struct PhasePoint {
  std::vector<double> x;
  std::vector<double> xi;
  double lambda = 0.0;
  double mu = 0.0;
  double t = 0.0;

  static PhasePoint at(double x1, double xi1, double lambda = 0.0, double t = 0.0) {
    return PhasePoint{{x1}, {xi1}, lambda, 0.0, t};
  }
  /// <w> = (1 + |x|^2 + |xi|^2)^{1/2}
  double japanese() const;
};

class SymExpr;

/// Variable layout: x_1..x_d, xi_1..xi_d, lambda, mu, t.
class Registry : public std::enable_shared_from_this<Registry> {
 public:
  struct Base {
    std::string name;
    TermMap poly;                          // real polynomial, no powers, no exp atom
    std::vector<TermMap> derivative;       // d/dvar for each variable
    std::vector<bool> depends;             // per variable
  };

  static std::shared_ptr<Registry> create(int dim);

  int dim() const { return dim_; }
  int num_vars() const { return 2 * dim_ + 3; }
  int var_x(int i) const { return i; }
  int var_xi(int i) const { return dim_ + i; }
  int var_lambda() const { return 2 * dim_; }
  int var_mu() const { return 2 * dim_ + 1; }
  int var_t() const { return 2 * dim_ + 2; }
  std::string var_name(int v) const;
  std::optional<int> parse_var(const std::string& name) const;

  /// Registers a base polynomial; its positivity is spot-checked on a
  /// seeded random grid over R^{2d} x [0,100]^2 (lambda, mu).
  int add_base(const std::string& name, const SymExpr& polynomial);
  /// Returns the id of a registered base with exactly this polynomial, or registers it.
  int intern_base(const std::string& name, const SymExpr& polynomial);

  std::optional<int> find_base(const std::string& name) const;
  std::optional<int> find_base_by_poly(const TermMap& poly) const;
  const Base& base(int id) const { return bases_.at(static_cast<std::size_t>(id)); }
  int num_bases() const { return static_cast<int>(bases_.size()); }

  /// Designates b in the exponential atom exp(-t*b). b may use base powers
  /// but must not depend on t and must not carry the atom itself.
  void set_exp_symbol(const SymExpr& b);
  bool has_exp_symbol() const { return exp_symbol_.has_value(); }
  const TermMap& exp_symbol() const;
  const TermMap& exp_symbol_derivative(int var) const;

 private:
  explicit Registry(int dim) : dim_(dim) {}

  int dim_;
  std::vector<Base> bases_;
  std::optional<TermMap> exp_symbol_;
  std::vector<TermMap> exp_symbol_derivative_;
};

using RegistryPtr = std::shared_ptr<const Registry>;

class SymExpr {
 public:
  explicit SymExpr(RegistryPtr reg) : reg_(std::move(reg)) {}
  SymExpr(RegistryPtr reg, TermMap terms);

  static SymExpr constant(RegistryPtr reg, const GaussRational& c);
  static SymExpr variable(RegistryPtr reg, int var, int power = 1);
  static SymExpr base_power(RegistryPtr reg, int base, Exponent e);
  /// exp(-t*b) for the registry's designated b.
  static SymExpr exp_atom(RegistryPtr reg);

  const RegistryPtr& registry() const { return reg_; }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  /// Structural zero of the canonical form.
  bool is_zero() const { return terms_.empty(); }
  /// Zero as a function: clears negative base powers and expands integer
  /// base powers into polynomials before the structural test. Complete
  /// when the registered bases are multiplicatively independent.
  bool vanishes_identically() const;

  bool is_polynomial() const;
  bool has_exp_atom() const;
  bool all_terms_have_exp_atom() const;
  /// Maximum exponent of a variable across terms.
  int degree_in(int var) const;
  bool depends_on(int var) const;

  SymExpr differentiate(int var) const;
  /// D = -i d/dvar
  SymExpr D(int var) const;

  SymExpr& operator+=(const SymExpr& o);
  SymExpr& operator-=(const SymExpr& o);
  SymExpr& operator*=(const GaussRational& c);
  SymExpr operator-() const;
  friend SymExpr operator+(SymExpr a, const SymExpr& b) { return a += b; }
  friend SymExpr operator-(SymExpr a, const SymExpr& b) { return a -= b; }
  friend SymExpr operator*(const SymExpr& a, const SymExpr& b) { return multiply(a, b); }
  friend SymExpr operator*(SymExpr a, const GaussRational& c) { return a *= c; }
  friend SymExpr operator*(const GaussRational& c, SymExpr a) { return a *= c; }
  friend bool operator==(const SymExpr& a, const SymExpr& b) { return a.terms_ == b.terms_; }

  static SymExpr multiply(const SymExpr& a, const SymExpr& b);

  /// Complex conjugate (bases are real and positive).
  SymExpr conj() const;
  SymExpr real_part() const;
  SymExpr imag_part() const;

  /// Drops the exponential atom from every term; all terms must carry it.
  SymExpr strip_exp_atom() const;
  SymExpr attach_exp_atom() const;
  /// Antiderivative in `var` vanishing at var = 0. Requires no base or atom to depend on var.
  SymExpr integrate_from_zero(int var) const;

  /// Sets var to zero. Bases depending on var are replaced by the registered
  /// base with the restricted polynomial (which must exist).
  SymExpr set_zero(int var) const;
  /// Renames variable `from` to `to`; bases depending on `from` are mapped to
  /// the registered base with the renamed polynomial (which must exist).
  SymExpr rename(int from, int to) const;

  std::complex<double> evaluate(const PhasePoint& p) const;

  /// Deterministic term-per-line form:
  ///   term <re> <im> | e_1 ... e_n | base^exp ... | exp=<0|1>
  std::string to_text() const;
  /// Human-readable infix form, e.g. "-1*x1^2*a^(-2)".
  std::string to_infix() const;

 private:
  void add_term(const TermKey& key, const GaussRational& c);

  RegistryPtr reg_;
  TermMap terms_;
};

/// Accumulates c*key into a term map, erasing cancelled entries.
void accumulate(TermMap& into, const TermKey& key, const GaussRational& c);
TermKey multiply_keys(const TermKey& a, const TermKey& b);
std::vector<BasePower> merge_powers(const std::vector<BasePower>& a,
                                    const std::vector<BasePower>& b);

/// Reads the infix grammar used by symbol files:
///   expr   := ['+'|'-'] term (('+'|'-') term)*
///   term   := factor ('*' factor)*
///   factor := number | 'i' | 'exp' | name ['^' power] | '(' expr ')' ['^' int]
///   power  := int | '(' ['-'] int ['/' int] ')' | '-' int
/// Names are variables (x, xi, x1.., xi1.., lambda, mu, t) or registered bases.
SymExpr parse_expr(RegistryPtr reg, const std::string& text);

/// Parses the line form written by SymExpr::to_text.
SymExpr parse_text(RegistryPtr reg, const std::string& text);

/// Fast repeated evaluation of one expression at many points.
class CompiledExpr {
 public:
  explicit CompiledExpr(const SymExpr& e);
  std::complex<double> operator()(const PhasePoint& p) const;
  const RegistryPtr& registry() const { return reg_; }

 private:
  struct Term {
    std::complex<double> coef;
    std::array<std::int16_t, kMaxVars> mono{};
    std::vector<std::pair<int, double>> powers;
    std::vector<std::pair<int, int>> int_powers;
    bool exp_flag = false;
  };
  RegistryPtr reg_;
  std::vector<Term> terms_;
  std::vector<int> used_bases_;
  std::vector<Term> exp_terms_;
  bool needs_exp_ = false;

  static Term compile_term(const TermKey& k, const GaussRational& c);
};

}  // namespace weyl
