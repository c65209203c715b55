#include "weyl/heat.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "weyl/numerics.hpp"

namespace weyl {

namespace {

SymExpr exp_symbol_expr(const RegistryPtr& reg) { return SymExpr(reg, reg->exp_symbol()); }

void check_symbol(const SymExpr& b) {
  const RegistryPtr& reg = b.registry();
  if (!reg->has_exp_symbol() || !(reg->exp_symbol() == b.terms()))
    throw Error(ErrorKind::InvalidInput, "heat symbol must be the registry's exponential symbol");
  if (b.has_exp_atom() || b.depends_on(reg->var_t()) || b.depends_on(reg->var_lambda()) ||
      b.depends_on(reg->var_mu()))
    throw Error(ErrorKind::UnsupportedSymbol, "heat symbol must depend on w only");
}

}  // namespace

std::vector<HeatTerm> heat_terms(const SymExpr& b, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidParameter, "heat order must be >= 1");
  check_symbol(b);
  const RegistryPtr& reg = b.registry();
  const int vt = reg->var_t();
  std::vector<HeatTerm> out;
  DerivativeCache cb(b);
  std::vector<DerivativeCache> cu;

  SymExpr one = SymExpr::constant(reg, GaussRational(1));
  out.push_back({0, one, SymExpr::exp_atom(reg)});
  cu.emplace_back(out.back().u);
  for (int j = 1; j < n; ++j) {
    SymExpr s(reg);
    for (int l = 1; l <= j; ++l) s += moyal_pairing(cb, cu[static_cast<std::size_t>(j - l)], l);
    // e^{sb} cancels the atom; integrate the polynomial in s from 0 to t
    SymExpr Q = -(s.strip_exp_atom().integrate_from_zero(vt));
    if (Q.degree_in(vt) > 3 * j)
      std::cerr << "warning: heat term " << j << " has t-degree " << Q.degree_in(vt) << " > " << 3 * j << '\n';
    SymExpr u = Q.is_zero() ? SymExpr(reg) : Q.attach_exp_atom();
    out.push_back({j, Q, u});
    cu.emplace_back(u);
  }
  return out;
}

SymExpr pde_residual(const std::vector<HeatTerm>& terms, int j) {
  if (j < 0 || j >= static_cast<int>(terms.size())) throw Error(ErrorKind::InvalidParameter, "residual index out of range");
  const RegistryPtr& reg = terms[0].u.registry();
  SymExpr b = exp_symbol_expr(reg);
  SymExpr r = terms[static_cast<std::size_t>(j)].u.differentiate(reg->var_t());
  for (int l = 0; l <= j; ++l) r += moyal_pairing(b, terms[static_cast<std::size_t>(j - l)].u, l);
  return r;
}

std::complex<double> heat_evaluate(const std::vector<HeatTerm>& terms, double t, const PhasePoint& w,
                                   const CutoffConfig& cfg, int n) {
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidParameter, "heat evaluation needs t >= 0");
  if (n < 0) n = static_cast<int>(terms.size());
  n = std::min<int>(n, static_cast<int>(terms.size()));
  PhasePoint p = w;
  p.t = t;
  std::vector<std::complex<double>> vals;
  for (int j = 0; j < n; ++j) vals.push_back(terms[static_cast<std::size_t>(j)].u.evaluate(p));
  return resum_values(vals, cfg, p, ResumStrategy::Cutoff);
}

// ---------------------------------------------------------------- bound profiles

namespace {

struct Sample {
  int order;  // exponent of h
  double ratio;
};

FittedBound fit(const std::vector<Sample>& s, std::size_t skipped) {
  FittedBound f;
  f.samples = s.size();
  f.skipped = skipped;
  for (const auto& x : s)
    if (x.order >= 1 && x.ratio > 0.0) f.h = std::max(f.h, std::pow(x.ratio, 1.0 / x.order));
  for (const auto& x : s) {
    double v = x.order == 0 ? x.ratio : (f.h > 0.0 ? x.ratio / std::pow(f.h, x.order) : 0.0);
    f.C = std::max(f.C, v);
  }
  return f;
}

std::vector<int> counts_of(const Registry& reg, const std::vector<int>& alpha) {
  std::vector<int> c(static_cast<std::size_t>(reg.num_vars()), 0);
  for (std::size_t i = 0; i < alpha.size(); ++i) c[i] = alpha[i];  // x_1..x_d, xi_1..xi_d come first
  return c;
}

}  // namespace

HeatBoundProfile bound_profile(const std::vector<HeatTerm>& terms, const std::vector<PhasePoint>& grid,
                               const std::vector<double>& t_grid, int n_max, int alpha_max,
                               const WeightSequence& A, double rho) {
  if (terms.empty()) throw Error(ErrorKind::InvalidInput, "no heat terms");
  if (n_max < 0 || n_max > 4 || alpha_max < 0 || alpha_max > 4)
    throw Error(ErrorKind::InvalidParameter, "n_max and alpha_max must lie in [0, 4]");
  const RegistryPtr& reg = terms[0].u.registry();
  const int d = reg->dim();
  const int vt = reg->var_t();
  const int J = static_cast<int>(terms.size());
  if (alpha_max + 2 * (J - 1) > A.p_max()) throw Error(ErrorKind::InvalidParameter, "weight table too short");

  SymExpr b = exp_symbol_expr(reg);
  CompiledExpr fb(b);
  std::vector<double> re_b(grid.size()), abs_b(grid.size()), jap(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto v = fb(grid[i]);
    re_b[i] = v.real();
    abs_b[i] = std::abs(v);
    jap[i] = grid[i].japanese();
  }

  HeatBoundProfile out;
  std::vector<Sample> heat, expb, powb;
  std::size_t skip_heat = 0, skip_exp = 0, skip_pow = 0;

  auto for_alpha = [&](auto&& body) {
    for (int order = 0; order <= alpha_max; ++order)
      for (const auto& alpha : multi_indices(2 * d, order)) body(order, counts_of(*reg, alpha));
  };

  // heat terms u_j
  for (int j = 0; j < J; ++j) {
    DerivativeCache cu(terms[static_cast<std::size_t>(j)].u);
    for_alpha([&](int order, std::vector<int> counts) {
      for (int n = 0; n <= n_max; ++n) {
        counts[static_cast<std::size_t>(vt)] = n;
        CompiledExpr f(cu.get(counts));
        const int k = order + 2 * j;
        for (std::size_t i = 0; i < grid.size(); ++i) {
          if (n > 0 && !(re_b[i] > 0.0)) {
            ++skip_heat;
            continue;
          }
          for (double t : t_grid) {
            PhasePoint p = grid[i];
            p.t = t;
            double den = factorial(n) * std::exp(A.log_M(k)) * std::pow(re_b[i], n) *
                         std::pow(jap[i], -rho * k) * std::exp(-0.25 * t * re_b[i]);
            heat.push_back({k, std::abs(f(p)) / den});
          }
        }
      }
    });
  }

  // e^{-tb}
  {
    DerivativeCache ce(SymExpr::exp_atom(reg));
    for_alpha([&](int order, std::vector<int> counts) {
      for (int n = 0; n <= n_max; ++n) {
        counts[static_cast<std::size_t>(vt)] = n;
        CompiledExpr f(ce.get(counts));
        for (std::size_t i = 0; i < grid.size(); ++i) {
          if (n > 0 && !(abs_b[i] > 0.0)) {
            ++skip_exp;
            continue;
          }
          for (double t : t_grid) {
            PhasePoint p = grid[i];
            p.t = t;
            double series = 0.0, term = 1.0;
            for (int r = 0; r <= order; ++r) {
              series += term;
              term *= std::fabs(t) * abs_b[i] / (r + 1);
            }
            double den = std::pow(2.0, n) * std::exp(A.log_M(order)) * std::pow(jap[i], -rho * order) *
                         std::pow(abs_b[i], n) * std::exp(-t * re_b[i]) * series;
            expb.push_back({order, std::abs(f(p)) / den});
          }
        }
      }
    });
  }

  // b^n
  {
    SymExpr bn = SymExpr::constant(reg, GaussRational(1));
    for (int n = 0; n <= n_max; ++n) {
      DerivativeCache cp(bn);
      for_alpha([&](int order, std::vector<int> counts) {
        CompiledExpr f(cp.get(counts));
        for (std::size_t i = 0; i < grid.size(); ++i) {
          if (!(abs_b[i] > 0.0)) {
            ++skip_pow;
            continue;
          }
          double den = std::pow(2.0, n) * std::exp(A.log_M(order)) * std::pow(jap[i], -rho * order) *
                       std::pow(abs_b[i], n);
          powb.push_back({order, std::abs(f(grid[i])) / den});
        }
      });
      bn = bn * b;
    }
  }

  out.heat = fit(heat, skip_heat);
  out.exp_bound = fit(expb, skip_exp);
  out.power_bound = fit(powb, skip_pow);
  return out;
}

// ---------------------------------------------------------------- Faa di Bruno

namespace {

// beta < alpha in the order used by p(alpha, r): by |.|, then lexicographically
bool precedes(const std::vector<int>& b, const std::vector<int>& a) {
  int sb = 0, sa = 0;
  for (int v : b) sb += v;
  for (int v : a) sa += v;
  if (sb != sa) return sb < sa;
  return b < a;
}

}  // namespace

std::vector<FaaDiBrunoTerm> faa_di_bruno_sets(const std::vector<int>& alpha, int r) {
  const int D = static_cast<int>(alpha.size());
  int total = 0;
  for (int v : alpha) total += v;
  std::vector<std::vector<int>> cands;
  for (int o = 1; o <= total; ++o)
    for (auto& g : multi_indices(D, o)) {
      bool ok = true;
      for (int i = 0; i < D; ++i) ok = ok && g[static_cast<std::size_t>(i)] <= alpha[static_cast<std::size_t>(i)];
      if (ok) cands.push_back(g);
    }
  std::sort(cands.begin(), cands.end(), precedes);

  std::vector<FaaDiBrunoTerm> out;
  FaaDiBrunoTerm cur;
  std::vector<int> rem = alpha;
  auto rec = [&](auto& self, std::size_t idx, int left) -> void {
    bool done = std::all_of(rem.begin(), rem.end(), [](int v) { return v == 0; });
    if (done) {
      if (left == 0) out.push_back(cur);
      return;
    }
    if (idx == cands.size() || left == 0) return;
    const auto& g = cands[idx];
    int kmax = left;
    for (int i = 0; i < D; ++i)
      if (g[static_cast<std::size_t>(i)] > 0) kmax = std::min(kmax, rem[static_cast<std::size_t>(i)] / g[static_cast<std::size_t>(i)]);
    self(self, idx + 1, left);
    for (int k = 1; k <= kmax; ++k) {
      for (int i = 0; i < D; ++i) rem[static_cast<std::size_t>(i)] -= g[static_cast<std::size_t>(i)];
      cur.parts.push_back(g);
      cur.mult.push_back(k);
      self(self, idx + 1, left - k);
      cur.parts.pop_back();
      cur.mult.pop_back();
    }
    for (int i = 0; i < D; ++i) rem[static_cast<std::size_t>(i)] += kmax * g[static_cast<std::size_t>(i)];
  };
  rec(rec, 0, r);
  return out;
}

mpz_class faa_di_bruno_bound_lhs(const std::vector<int>& beta) {
  int n = 0;
  for (int v : beta) n += v;
  auto fact = [](int k) {
    mpz_class f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  mpz_class total = 0;
  for (int r = 1; r <= n; ++r) {
    mpz_class binom = fact(n) / (fact(r) * fact(n - r));
    mpz_class inner = 0;
    for (const auto& term : faa_di_bruno_sets(beta, r)) {
      mpz_class den = 1;
      for (int k : term.mult) den *= fact(k);
      inner += fact(r) / den;
    }
    total += binom * inner;
  }
  return total;
}

SymExpr faa_di_bruno_exp(const RegistryPtr& reg, const std::vector<int>& counts) {
  const int nv = reg->num_vars();
  if (static_cast<int>(counts.size()) != nv) throw Error(ErrorKind::InvalidInput, "derivative counts do not match the registry");
  int total = 0;
  for (int v : counts) total += v;
  SymExpr atom = SymExpr::exp_atom(reg);
  if (total == 0) return atom;
  DerivativeCache cb(exp_symbol_expr(reg));
  auto fact = [](int k) {
    mpz_class f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  mpz_class alpha_fact = 1;
  for (int v : counts) alpha_fact *= fact(v);
  SymExpr out(reg);
  for (int r = 1; r <= total; ++r) {
    // f^{(r)}(b) = (-t)^r e^{-tb}
    SymExpr fr = SymExpr::variable(reg, reg->var_t(), r) * atom;
    if (r % 2) fr = -fr;
    for (const auto& term : faa_di_bruno_sets(counts, r)) {
      SymExpr prod = SymExpr::constant(reg, GaussRational(1));
      mpz_class den = 1;
      for (std::size_t j = 0; j < term.parts.size(); ++j) {
        const SymExpr& dg = cb.get(term.parts[j]);
        mpz_class pf = 1;
        for (int v : term.parts[j]) pf *= fact(v);
        den *= fact(term.mult[j]);
        for (int k = 0; k < term.mult[j]; ++k) {
          prod = prod * dg;
          den *= pf;
        }
      }
      out += (fr * prod) * GaussRational(Rational(alpha_fact) / Rational(den));
    }
  }
  return out;
}

}  // namespace weyl
