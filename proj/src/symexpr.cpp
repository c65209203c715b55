#include "weyl/symexpr.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace weyl {

namespace {

bool is_pure_polynomial(const TermMap& m) {
  return std::all_of(m.begin(), m.end(),
                     [](const auto& kv) { return kv.first.powers.empty() && !kv.first.exp_flag; });
}

double eval_monomial(const Monomial& mono, int nvars, const std::array<double, kMaxVars>& vals) {
  double v = 1.0;
  for (int i = 0; i < nvars; ++i)
    for (int k = 0; k < mono.e[i]; ++k) v *= vals[i];
  return v;
}

std::array<double, kMaxVars> point_values(const Registry& reg, const PhasePoint& p) {
  const int d = reg.dim();
  if (static_cast<int>(p.x.size()) != d || static_cast<int>(p.xi.size()) != d)
    throw Error(ErrorKind::InvalidInput, "phase point dimension does not match registry");
  std::array<double, kMaxVars> vals{};
  for (int i = 0; i < d; ++i) {
    vals[reg.var_x(i)] = p.x[i];
    vals[reg.var_xi(i)] = p.xi[i];
  }
  vals[reg.var_lambda()] = p.lambda;
  vals[reg.var_mu()] = p.mu;
  vals[reg.var_t()] = p.t;
  return vals;
}

double eval_polynomial(const TermMap& poly, int nvars, const std::array<double, kMaxVars>& vals) {
  double s = 0.0;
  for (const auto& [k, c] : poly) s += c.re.get_d() * eval_monomial(k.mono, nvars, vals);
  return s;
}

TermMap differentiate_polynomial(const TermMap& poly, int var) {
  TermMap out;
  for (const auto& [k, c] : poly) {
    if (k.mono.e[var] == 0) continue;
    TermKey nk = k;
    nk.mono.e[var] -= 1;
    accumulate(out, nk, c * GaussRational(static_cast<long>(k.mono.e[var])));
  }
  return out;
}

TermMap multiply_maps(const TermMap& a, const TermMap& b) {
  TermMap out;
  for (const auto& [ka, ca] : a)
    for (const auto& [kb, cb] : b) accumulate(out, multiply_keys(ka, kb), ca * cb);
  return out;
}

TermMap rename_polynomial(const TermMap& poly, int from, int to) {
  TermMap out;
  for (const auto& [k, c] : poly) {
    TermKey nk = k;
    nk.mono.e[to] = static_cast<std::int16_t>(nk.mono.e[to] + nk.mono.e[from]);
    nk.mono.e[from] = 0;
    accumulate(out, nk, c);
  }
  return out;
}

TermMap restrict_zero_polynomial(const TermMap& poly, int var) {
  TermMap out;
  for (const auto& [k, c] : poly)
    if (k.mono.e[var] == 0) accumulate(out, k, c);
  return out;
}

}  // namespace

double PhasePoint::japanese() const {
  double s = 1.0;
  for (double v : x) s += v * v;
  for (double v : xi) s += v * v;
  return std::sqrt(s);
}

void accumulate(TermMap& into, const TermKey& key, const GaussRational& c) {
  if (c.is_zero()) return;
  auto it = into.find(key);
  if (it == into.end()) {
    into.emplace(key, c);
    return;
  }
  it->second += c;
  if (it->second.is_zero()) into.erase(it);
}

std::vector<BasePower> merge_powers(const std::vector<BasePower>& a,
                                    const std::vector<BasePower>& b) {
  std::vector<BasePower> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].base < b[j].base)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].base < a[i].base) {
      out.push_back(b[j++]);
    } else {
      Exponent e = a[i].exp + b[j].exp;
      if (!e.is_zero()) out.push_back({a[i].base, e});
      ++i;
      ++j;
    }
  }
  return out;
}

TermKey multiply_keys(const TermKey& a, const TermKey& b) {
  if (a.exp_flag && b.exp_flag)
    throw Error(ErrorKind::UnsupportedOperation,
                "product of two exponential atoms exp(-t*b) is outside the algebra");
  TermKey k;
  for (int v = 0; v < kMaxVars; ++v)
    k.mono.e[v] = static_cast<std::int16_t>(a.mono.e[v] + b.mono.e[v]);
  k.powers = a.powers.empty() ? b.powers : (b.powers.empty() ? a.powers : merge_powers(a.powers, b.powers));
  k.exp_flag = a.exp_flag || b.exp_flag;
  return k;
}

// ---------------------------------------------------------------- Registry

std::shared_ptr<Registry> Registry::create(int dim) {
  if (dim < 1 || dim > kMaxDim)
    throw Error(ErrorKind::InvalidParameter, "dimension must be in [1, 3]");
  return std::shared_ptr<Registry>(new Registry(dim));
}

std::string Registry::var_name(int v) const {
  if (v < dim_) return dim_ == 1 ? "x" : "x" + std::to_string(v + 1);
  if (v < 2 * dim_) return dim_ == 1 ? "xi" : "xi" + std::to_string(v - dim_ + 1);
  if (v == var_lambda()) return "lambda";
  if (v == var_mu()) return "mu";
  if (v == var_t()) return "t";
  throw Error(ErrorKind::InvalidInput, "variable index out of range");
}

std::optional<int> Registry::parse_var(const std::string& name) const {
  if (name == "lambda") return var_lambda();
  if (name == "mu") return var_mu();
  if (name == "t") return var_t();
  if (dim_ == 1 && name == "x") return var_x(0);
  if (dim_ == 1 && name == "xi") return var_xi(0);
  auto indexed = [&](const std::string& prefix) -> std::optional<int> {
    if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) return {};
    std::string rest = name.substr(prefix.size());
    if (!std::all_of(rest.begin(), rest.end(), ::isdigit)) return {};
    int i = std::stoi(rest);
    if (i < 1 || i > dim_) return {};
    return i - 1;
  };
  if (auto i = indexed("xi")) return var_xi(*i);
  if (auto i = indexed("x")) return var_x(*i);
  return {};
}

std::optional<int> Registry::find_base(const std::string& name) const {
  for (std::size_t i = 0; i < bases_.size(); ++i)
    if (bases_[i].name == name) return static_cast<int>(i);
  return {};
}

std::optional<int> Registry::find_base_by_poly(const TermMap& poly) const {
  for (std::size_t i = 0; i < bases_.size(); ++i)
    if (bases_[i].poly == poly) return static_cast<int>(i);
  return {};
}

int Registry::add_base(const std::string& name, const SymExpr& polynomial) {
  if (name.empty() || parse_var(name) || name == "i" || name == "exp")
    throw Error(ErrorKind::InvalidInput, "base name '" + name + "' is reserved");
  if (find_base(name)) throw Error(ErrorKind::InvalidInput, "base name '" + name + "' already registered");
  if (polynomial.registry().get() != this)
    throw Error(ErrorKind::InvalidInput, "base polynomial built on a different registry");
  const TermMap& poly = polynomial.terms();
  if (!is_pure_polynomial(poly))
    throw Error(ErrorKind::InvalidInput, "base '" + name + "' must be a polynomial");
  for (const auto& [k, c] : poly)
    if (!c.is_real()) throw Error(ErrorKind::InvalidInput, "base '" + name + "' must have real coefficients");
  if (poly.empty()) throw Error(ErrorKind::DomainViolation, "base '" + name + "' is identically zero");

  std::mt19937_64 rng(0x5eedba5eULL);
  std::uniform_real_distribution<double> phase(-10.0, 10.0);
  std::uniform_real_distribution<double> param(0.0, 100.0);
  for (int s = 0; s < 400; ++s) {
    std::array<double, kMaxVars> vals{};
    for (int i = 0; i < 2 * dim_; ++i) vals[i] = s < 8 ? 0.0 : phase(rng) * (s % 3 == 0 ? 0.1 : 1.0);
    vals[var_lambda()] = s < 16 ? 0.0 : param(rng);
    vals[var_mu()] = s < 16 ? 0.0 : param(rng);
    vals[var_t()] = 0.0;
    double v = eval_polynomial(poly, num_vars(), vals);
    if (!(v > 0.0))
      throw Error(ErrorKind::DomainViolation,
                  "base '" + name + "' is not positive on the registration grid (value " +
                      std::to_string(v) + ")");
  }

  Base b;
  b.name = name;
  b.poly = poly;
  for (int v = 0; v < num_vars(); ++v) {
    b.derivative.push_back(differentiate_polynomial(poly, v));
    b.depends.push_back(!b.derivative.back().empty());
  }
  bases_.push_back(std::move(b));
  return static_cast<int>(bases_.size() - 1);
}

int Registry::intern_base(const std::string& name, const SymExpr& polynomial) {
  if (auto id = find_base_by_poly(polynomial.terms())) return *id;
  return add_base(name, polynomial);
}

void Registry::set_exp_symbol(const SymExpr& b) {
  if (b.registry().get() != this)
    throw Error(ErrorKind::InvalidInput, "exponential symbol built on a different registry");
  if (b.has_exp_atom()) throw Error(ErrorKind::UnsupportedSymbol, "exponential symbol may not contain exp atom");
  if (b.depends_on(var_t())) throw Error(ErrorKind::UnsupportedSymbol, "exponential symbol may not depend on t");
  exp_symbol_ = b.terms();
  exp_symbol_derivative_.clear();
  for (int v = 0; v < num_vars(); ++v) exp_symbol_derivative_.push_back(b.differentiate(v).terms());
}

const TermMap& Registry::exp_symbol() const {
  if (!exp_symbol_) throw Error(ErrorKind::InvalidInput, "registry has no exponential symbol");
  return *exp_symbol_;
}

const TermMap& Registry::exp_symbol_derivative(int var) const {
  if (!exp_symbol_) throw Error(ErrorKind::InvalidInput, "registry has no exponential symbol");
  return exp_symbol_derivative_.at(static_cast<std::size_t>(var));
}

// ---------------------------------------------------------------- SymExpr

SymExpr::SymExpr(RegistryPtr reg, TermMap terms) : reg_(std::move(reg)) {
  for (auto& [k, c] : terms)
    if (!c.is_zero()) terms_.emplace(k, c);
}

SymExpr SymExpr::constant(RegistryPtr reg, const GaussRational& c) {
  SymExpr e(std::move(reg));
  e.add_term(TermKey{}, c);
  return e;
}

SymExpr SymExpr::variable(RegistryPtr reg, int var, int power) {
  if (var < 0 || var >= reg->num_vars()) throw Error(ErrorKind::InvalidInput, "variable index out of range");
  if (power < 0) throw Error(ErrorKind::InvalidInput, "negative variable power");
  SymExpr e(std::move(reg));
  TermKey k;
  k.mono.e[var] = static_cast<std::int16_t>(power);
  e.add_term(k, GaussRational(1));
  return e;
}

SymExpr SymExpr::base_power(RegistryPtr reg, int base, Exponent ex) {
  if (base < 0 || base >= reg->num_bases()) throw Error(ErrorKind::InvalidInput, "unknown base id");
  SymExpr e(std::move(reg));
  TermKey k;
  if (!ex.is_zero()) k.powers.push_back({base, ex});
  e.add_term(k, GaussRational(1));
  return e;
}

SymExpr SymExpr::exp_atom(RegistryPtr reg) {
  if (!reg->has_exp_symbol()) throw Error(ErrorKind::InvalidInput, "registry has no exponential symbol");
  SymExpr e(std::move(reg));
  TermKey k;
  k.exp_flag = true;
  e.add_term(k, GaussRational(1));
  return e;
}

void SymExpr::add_term(const TermKey& key, const GaussRational& c) { accumulate(terms_, key, c); }

bool SymExpr::is_polynomial() const { return is_pure_polynomial(terms_); }

bool SymExpr::has_exp_atom() const {
  return std::any_of(terms_.begin(), terms_.end(), [](const auto& kv) { return kv.first.exp_flag; });
}

bool SymExpr::all_terms_have_exp_atom() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& kv) { return kv.first.exp_flag; });
}

int SymExpr::degree_in(int var) const {
  int d = 0;
  for (const auto& [k, c] : terms_) d = std::max<int>(d, k.mono.e[var]);
  return d;
}

bool SymExpr::depends_on(int var) const {
  for (const auto& [k, c] : terms_) {
    if (k.mono.e[var] != 0) return true;
    for (const auto& bp : k.powers)
      if (reg_->base(bp.base).depends[var]) return true;
    if (k.exp_flag) {
      if (var == reg_->var_t() || !reg_->exp_symbol_derivative(var).empty()) return true;
    }
  }
  return false;
}

SymExpr& SymExpr::operator+=(const SymExpr& o) {
  if (o.reg_ != reg_) throw Error(ErrorKind::InvalidInput, "expressions from different registries");
  for (const auto& [k, c] : o.terms_) add_term(k, c);
  return *this;
}

SymExpr& SymExpr::operator-=(const SymExpr& o) {
  if (o.reg_ != reg_) throw Error(ErrorKind::InvalidInput, "expressions from different registries");
  for (const auto& [k, c] : o.terms_) add_term(k, -c);
  return *this;
}

SymExpr& SymExpr::operator*=(const GaussRational& c) {
  if (c.is_zero()) {
    terms_.clear();
    return *this;
  }
  for (auto& [k, v] : terms_) v *= c;
  return *this;
}

SymExpr SymExpr::operator-() const {
  SymExpr r = *this;
  for (auto& [k, v] : r.terms_) v = -v;
  return r;
}

SymExpr SymExpr::multiply(const SymExpr& a, const SymExpr& b) {
  if (a.reg_ != b.reg_) throw Error(ErrorKind::InvalidInput, "expressions from different registries");
  SymExpr out(a.reg_);
  for (const auto& [ka, ca] : a.terms_)
    for (const auto& [kb, cb] : b.terms_) out.add_term(multiply_keys(ka, kb), ca * cb);
  return out;
}

SymExpr SymExpr::differentiate(int var) const {
  const Registry& reg = *reg_;
  if (var < 0 || var >= reg.num_vars()) throw Error(ErrorKind::InvalidInput, "variable index out of range");
  SymExpr out(reg_);
  for (const auto& [k, c] : terms_) {
    if (k.mono.e[var] > 0) {
      TermKey nk = k;
      nk.mono.e[var] -= 1;
      out.add_term(nk, c * GaussRational(static_cast<long>(k.mono.e[var])));
    }
    for (std::size_t i = 0; i < k.powers.size(); ++i) {
      const BasePower& bp = k.powers[i];
      const auto& base = reg.base(bp.base);
      if (!base.depends[var]) continue;
      TermKey lowered = k;
      Exponent ne = bp.exp - Exponent(1);
      if (ne.is_zero())
        lowered.powers.erase(lowered.powers.begin() + static_cast<std::ptrdiff_t>(i));
      else
        lowered.powers[i].exp = ne;
      GaussRational factor = c * GaussRational(bp.exp.to_rational());
      for (const auto& [kd, cd] : base.derivative[var])
        out.add_term(multiply_keys(lowered, kd), factor * cd);
    }
    if (k.exp_flag) {
      if (var == reg.var_t()) {
        for (const auto& [kb, cb] : reg.exp_symbol()) out.add_term(multiply_keys(k, kb), -(c * cb));
      } else {
        TermKey with_t = k;
        with_t.mono.e[reg.var_t()] += 1;
        for (const auto& [kb, cb] : reg.exp_symbol_derivative(var))
          out.add_term(multiply_keys(with_t, kb), -(c * cb));
      }
    }
  }
  return out;
}

SymExpr SymExpr::D(int var) const {
  SymExpr d = differentiate(var);
  d *= minus_i_pow(1);
  return d;
}

SymExpr SymExpr::conj() const {
  SymExpr r = *this;
  for (auto& [k, v] : r.terms_) v = v.conj();
  return r;
}

SymExpr SymExpr::real_part() const {
  SymExpr r(reg_);
  for (const auto& [k, v] : terms_) r.add_term(k, GaussRational(v.re));
  return r;
}

SymExpr SymExpr::imag_part() const {
  SymExpr r(reg_);
  for (const auto& [k, v] : terms_) r.add_term(k, GaussRational(v.im));
  return r;
}

SymExpr SymExpr::strip_exp_atom() const {
  SymExpr r(reg_);
  for (const auto& [k, v] : terms_) {
    if (!k.exp_flag) throw Error(ErrorKind::UnsupportedOperation, "term without exponential atom");
    TermKey nk = k;
    nk.exp_flag = false;
    r.add_term(nk, v);
  }
  return r;
}

SymExpr SymExpr::attach_exp_atom() const {
  if (!reg_->has_exp_symbol()) throw Error(ErrorKind::InvalidInput, "registry has no exponential symbol");
  SymExpr r(reg_);
  for (const auto& [k, v] : terms_) {
    if (k.exp_flag) throw Error(ErrorKind::UnsupportedOperation, "term already carries the exponential atom");
    TermKey nk = k;
    nk.exp_flag = true;
    r.add_term(nk, v);
  }
  return r;
}

SymExpr SymExpr::integrate_from_zero(int var) const {
  SymExpr r(reg_);
  for (const auto& [k, v] : terms_) {
    for (const auto& bp : k.powers)
      if (reg_->base(bp.base).depends[var])
        throw Error(ErrorKind::UnsupportedOperation, "integrand base depends on the integration variable");
    if (k.exp_flag) throw Error(ErrorKind::UnsupportedOperation, "integrand carries the exponential atom");
    TermKey nk = k;
    long n = nk.mono.e[var] + 1;
    nk.mono.e[var] = static_cast<std::int16_t>(n);
    r.add_term(nk, v * GaussRational(Rational(1, n)));
  }
  return r;
}

SymExpr SymExpr::set_zero(int var) const {
  SymExpr r(reg_);
  for (const auto& [k, v] : terms_) {
    if (k.mono.e[var] != 0) continue;
    if (k.exp_flag && var != reg_->var_t() && !reg_->exp_symbol_derivative(var).empty())
      throw Error(ErrorKind::UnsupportedOperation, "exponential symbol depends on the substituted variable");
    TermKey nk = k;
    if (k.exp_flag && var == reg_->var_t()) nk.exp_flag = false;  // exp(-0*b) = 1
    for (auto& bp : nk.powers) {
      const auto& base = reg_->base(bp.base);
      if (!base.depends[var]) continue;
      auto id = reg_->find_base_by_poly(restrict_zero_polynomial(base.poly, var));
      if (!id)
        throw Error(ErrorKind::UnsupportedOperation,
                    "no registered base equals '" + base.name + "' at " + reg_->var_name(var) + " = 0");
      bp.base = *id;
    }
    std::sort(nk.powers.begin(), nk.powers.end());
    std::vector<BasePower> merged;
    for (const auto& bp : nk.powers) merged = merge_powers(merged, {bp});
    nk.powers = std::move(merged);
    r.add_term(nk, v);
  }
  return r;
}

SymExpr SymExpr::rename(int from, int to) const {
  SymExpr r(reg_);
  for (const auto& [k, v] : terms_) {
    if (k.exp_flag && !reg_->exp_symbol_derivative(from).empty())
      throw Error(ErrorKind::UnsupportedOperation, "exponential symbol depends on the renamed variable");
    TermKey nk = k;
    nk.mono.e[to] = static_cast<std::int16_t>(nk.mono.e[to] + nk.mono.e[from]);
    nk.mono.e[from] = 0;
    for (auto& bp : nk.powers) {
      const auto& base = reg_->base(bp.base);
      if (!base.depends[from]) continue;
      auto id = reg_->find_base_by_poly(rename_polynomial(base.poly, from, to));
      if (!id)
        throw Error(ErrorKind::UnsupportedOperation, "no registered base matches renamed '" + base.name + "'");
      bp.base = *id;
    }
    std::sort(nk.powers.begin(), nk.powers.end());
    std::vector<BasePower> merged;
    for (const auto& bp : nk.powers) merged = merge_powers(merged, {bp});
    nk.powers = std::move(merged);
    r.add_term(nk, v);
  }
  return r;
}

bool SymExpr::vanishes_identically() const {
  if (terms_.empty()) return true;
  const Registry& reg = *reg_;
  std::vector<std::int64_t> clear(static_cast<std::size_t>(reg.num_bases()), 0);
  for (const auto& [k, c] : terms_)
    for (const auto& bp : k.powers)
      clear[bp.base] = std::max<std::int64_t>(clear[bp.base], -bp.exp.floor());

  std::map<std::pair<int, std::int64_t>, TermMap> power_cache;
  auto poly_power = [&](int base, std::int64_t n) -> const TermMap& {
    auto key = std::make_pair(base, n);
    auto it = power_cache.find(key);
    if (it != power_cache.end()) return it->second;
    TermMap acc;
    acc.emplace(TermKey{}, GaussRational(1));
    for (std::int64_t i = 0; i < n; ++i) acc = multiply_maps(acc, reg.base(base).poly);
    return power_cache.emplace(key, std::move(acc)).first->second;
  };

  TermMap expanded;
  for (const auto& [k, c] : terms_) {
    std::vector<BasePower> shifted = k.powers;
    for (int b = 0; b < reg.num_bases(); ++b)
      if (clear[b] > 0) shifted = merge_powers(shifted, {BasePower{b, Exponent(clear[b])}});
    TermKey rest = k;
    rest.powers.clear();
    TermMap local;
    local.emplace(rest, c);
    for (const auto& bp : shifted) {
      std::int64_t n = bp.exp.floor();
      Exponent frac = bp.exp - Exponent(n);
      if (!frac.is_zero()) {
        TermKey fk;
        fk.powers.push_back({bp.base, frac});
        TermMap f;
        f.emplace(fk, GaussRational(1));
        local = multiply_maps(local, f);
      }
      if (n > 0) local = multiply_maps(local, poly_power(bp.base, n));
    }
    for (const auto& [lk, lc] : local) accumulate(expanded, lk, lc);
  }
  return expanded.empty();
}

std::complex<double> SymExpr::evaluate(const PhasePoint& p) const { return CompiledExpr(*this)(p); }

std::string SymExpr::to_text() const {
  std::ostringstream os;
  const int n = reg_->num_vars();
  for (const auto& [k, c] : terms_) {
    os << "term " << c.re.get_str() << ' ' << c.im.get_str() << " |";
    for (int v = 0; v < n; ++v) os << ' ' << k.mono.e[v];
    os << " |";
    for (const auto& bp : k.powers) os << ' ' << reg_->base(bp.base).name << '^' << bp.exp.str();
    os << " | exp=" << (k.exp_flag ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string SymExpr::to_infix() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << to_string(c);
    for (int v = 0; v < reg_->num_vars(); ++v) {
      if (k.mono.e[v] == 0) continue;
      os << '*' << reg_->var_name(v);
      if (k.mono.e[v] != 1) os << '^' << k.mono.e[v];
    }
    for (const auto& bp : k.powers) {
      os << '*' << reg_->base(bp.base).name;
      if (!(bp.exp == Exponent(1))) os << "^(" << bp.exp.str() << ')';
    }
    if (k.exp_flag) os << "*exp";
  }
  return os.str();
}

SymExpr parse_text(RegistryPtr reg, const std::string& text) {
  SymExpr out(reg);
  TermMap terms;
  std::istringstream in(text);
  std::string line;
  const int n = reg->num_vars();
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find('|', start)) != std::string::npos; start = pos + 1)
      parts.push_back(line.substr(start, pos - start));
    parts.push_back(line.substr(start));
    if (parts.size() != 4) throw Error(ErrorKind::InvalidInput, "malformed term line: " + line);
    std::istringstream head(parts[0]);
    std::string tag, re, im;
    head >> tag >> re >> im;
    if (tag != "term") throw Error(ErrorKind::InvalidInput, "expected 'term': " + line);
    GaussRational c(parse_rational(re), parse_rational(im));
    TermKey k;
    std::istringstream mono(parts[1]);
    for (int v = 0; v < n; ++v) {
      int e = 0;
      if (!(mono >> e) || e < 0) throw Error(ErrorKind::InvalidInput, "bad exponent tuple: " + line);
      k.mono.e[v] = static_cast<std::int16_t>(e);
    }
    std::istringstream pw(parts[2]);
    std::string tok;
    while (pw >> tok) {
      auto caret = tok.find('^');
      if (caret == std::string::npos) throw Error(ErrorKind::InvalidInput, "bad base power: " + tok);
      auto id = reg->find_base(tok.substr(0, caret));
      if (!id) throw Error(ErrorKind::InvalidInput, "unknown base: " + tok);
      k.powers = merge_powers(k.powers, {BasePower{*id, parse_exponent(tok.substr(caret + 1))}});
    }
    std::string flag = parts[3];
    flag.erase(std::remove_if(flag.begin(), flag.end(), ::isspace), flag.end());
    if (flag == "exp=1") {
      if (!reg->has_exp_symbol()) throw Error(ErrorKind::InvalidInput, "exp atom without exponential symbol");
      k.exp_flag = true;
    } else if (flag != "exp=0") {
      throw Error(ErrorKind::InvalidInput, "bad exp flag: " + line);
    }
    accumulate(terms, k, c);
  }
  return SymExpr(reg, std::move(terms));
}

// ---------------------------------------------------------------- parser

namespace {

class Parser {
 public:
  Parser(RegistryPtr reg, const std::string& text) : reg_(std::move(reg)), s_(text) {}

  SymExpr parse() {
    SymExpr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::InvalidInput, msg + " at offset " + std::to_string(pos_) + " in '" + s_ + "'");
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  SymExpr expr() {
    SymExpr acc(reg_);
    bool neg = false;
    if (accept('-')) neg = true;
    else accept('+');
    SymExpr t = term();
    acc += neg ? -t : t;
    for (;;) {
      if (accept('+')) acc += term();
      else if (accept('-')) acc -= term();
      else break;
    }
    return acc;
  }

  SymExpr term() {
    SymExpr acc = factor();
    for (;;) {
      if (accept('*')) {
        acc = acc * factor();
      } else if (accept('/')) {
        SymExpr d = factor();
        if (d.size() != 1 || !(d.terms().begin()->first == TermKey{}))
          fail("division only by non-zero constants");
        const GaussRational& c = d.terms().begin()->second;
        if (!c.is_real()) fail("division only by real constants");
        acc *= GaussRational(Rational(1) / c.re);
      } else {
        break;
      }
    }
    return acc;
  }

  std::string ident() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    return s_.substr(start, pos_ - start);
  }

  Rational number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    return parse_rational(s_.substr(start, pos_ - start));
  }

  Exponent power() {
    skip_ws();
    if (accept('(')) {
      bool neg = accept('-');
      skip_ws();
      Rational q = number();
      if (accept('/')) {
        skip_ws();
        q /= number();
      }
      if (!accept(')')) fail("expected ')' in exponent");
      if (neg) q = -q;
      return {q.get_num().get_si(), q.get_den().get_si()};
    }
    bool neg = accept('-');
    skip_ws();
    Rational q = number();
    if (q.get_den() != 1) fail("fractional exponents need parentheses");
    return {neg ? -q.get_num().get_si() : q.get_num().get_si(), 1};
  }

  SymExpr factor() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    SymExpr f(reg_);
    if (c == '(') {
      ++pos_;
      f = expr();
      if (!accept(')')) fail("expected ')'");
      if (accept('^')) {
        Exponent e = power();
        if (!e.is_integer() || e.num() < 0) fail("parenthesised groups take non-negative integer powers");
        SymExpr base = f;
        f = SymExpr::constant(reg_, GaussRational(1));
        for (std::int64_t i = 0; i < e.num(); ++i) f = f * base;
      }
      return f;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return SymExpr::constant(reg_, GaussRational(number()));
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string name = ident();
      if (name == "i") return SymExpr::constant(reg_, GaussRational::i());
      if (name == "exp") return SymExpr::exp_atom(reg_);
      Exponent e(1);
      bool has_power = false;
      if (accept('^')) {
        e = power();
        has_power = true;
      }
      if (auto v = reg_->parse_var(name)) {
        if (!e.is_integer() || e.num() < 0) fail("variables take non-negative integer powers");
        return SymExpr::variable(reg_, *v, static_cast<int>(e.num()));
      }
      if (auto b = reg_->find_base(name)) return SymExpr::base_power(reg_, *b, e);
      (void)has_power;
      fail("unknown name '" + name + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  RegistryPtr reg_;
  std::string s_;
  std::size_t pos_ = 0;
};

}  // namespace

SymExpr parse_expr(RegistryPtr reg, const std::string& text) { return Parser(std::move(reg), text).parse(); }

// ---------------------------------------------------------------- CompiledExpr

CompiledExpr::Term CompiledExpr::compile_term(const TermKey& k, const GaussRational& c) {
  Term t;
  t.coef = c.to_complex();
  t.mono = k.mono.e;
  for (const auto& bp : k.powers) {
    if (bp.exp.is_integer() && bp.exp.num() >= -64 && bp.exp.num() <= 64)
      t.int_powers.emplace_back(bp.base, static_cast<int>(bp.exp.num()));
    else
      t.powers.emplace_back(bp.base, bp.exp.value());
  }
  t.exp_flag = k.exp_flag;
  return t;
}

CompiledExpr::CompiledExpr(const SymExpr& e) : reg_(e.registry()) {
  std::vector<bool> used(static_cast<std::size_t>(reg_->num_bases()), false);
  for (const auto& [k, c] : e.terms()) {
    for (const auto& bp : k.powers) used[bp.base] = true;
    needs_exp_ = needs_exp_ || k.exp_flag;
    terms_.push_back(compile_term(k, c));
  }
  if (needs_exp_) {
    for (const auto& [k, c] : reg_->exp_symbol()) {
      for (const auto& bp : k.powers) used[bp.base] = true;
      exp_terms_.push_back(compile_term(k, c));
    }
  }
  for (std::size_t b = 0; b < used.size(); ++b)
    if (used[b]) used_bases_.push_back(static_cast<int>(b));
}

std::complex<double> CompiledExpr::operator()(const PhasePoint& p) const {
  const Registry& reg = *reg_;
  const int n = reg.num_vars();
  auto vals = point_values(reg, p);
  std::vector<double> base_val(static_cast<std::size_t>(reg.num_bases()), 0.0);
  std::vector<double> base_log(static_cast<std::size_t>(reg.num_bases()), 0.0);
  for (int b : used_bases_) {
    double v = eval_polynomial(reg.base(b).poly, n, vals);
    if (!(v > 0.0)) {
      std::ostringstream os;
      os << "base '" << reg.base(b).name << "' = " << v << " is not positive at (";
      for (double xv : p.x) os << xv << ' ';
      for (double xv : p.xi) os << xv << ' ';
      os << "lambda=" << p.lambda << ')';
      throw Error(ErrorKind::DomainViolation, os.str());
    }
    base_val[b] = v;
    base_log[b] = std::log(v);
  }
  auto term_value = [&](const std::array<std::int16_t, kMaxVars>& mono, const auto& ipow, const auto& fpow) {
    double v = 1.0;
    for (int i = 0; i < n; ++i) {
      int e = mono[i];
      if (e == 0) continue;
      double x = vals[i], r = 1.0;
      while (e) {
        if (e & 1) r *= x;
        x *= x;
        e >>= 1;
      }
      v *= r;
    }
    for (const auto& [b, e] : ipow) {
      int k = e < 0 ? -e : e;
      double x = base_val[b], r = 1.0;
      while (k) {
        if (k & 1) r *= x;
        x *= x;
        k >>= 1;
      }
      v *= e < 0 ? 1.0 / r : r;
    }
    double logs = 0.0;
    for (const auto& [b, e] : fpow) logs += e * base_log[b];
    if (!fpow.empty()) v *= std::exp(logs);
    return v;
  };

  std::complex<double> exp_factor = 1.0;
  if (needs_exp_) {
    std::complex<double> b = 0.0;
    for (const auto& t : exp_terms_) b += t.coef * term_value(t.mono, t.int_powers, t.powers);
    exp_factor = std::exp(-p.t * b);
  }

  std::complex<double> sum = 0.0;
  for (const auto& t : terms_) {
    std::complex<double> v = t.coef * term_value(t.mono, t.int_powers, t.powers);
    if (t.exp_flag) v *= exp_factor;
    sum += v;
  }
  return sum;
}

}  // namespace weyl
