#include "weyl/parametrix.hpp"

#include <algorithm>
#include <cmath>

#include "weyl/numerics.hpp"

namespace weyl {

namespace {

// q_0 = a^{-1} inside the algebra.
SymExpr inverse_of(const SymExpr& a) {
  const RegistryPtr& reg = a.registry();
  if (a.is_zero()) throw Error(ErrorKind::InvalidInput, "cannot invert the zero symbol");
  if (a.size() == 1) {
    const auto& [k, c] = *a.terms().begin();
    bool trivial_mono = std::all_of(k.mono.e.begin(), k.mono.e.end(), [](auto e) { return e == 0; });
    if (trivial_mono && !k.exp_flag) {
      if (k.powers.empty()) {
        if (!c.is_real()) throw Error(ErrorKind::InvalidInput, "complex constant symbols are not supported");
        return SymExpr::constant(reg, GaussRational(Rational(1) / c.re));
      }
      if (k.powers.size() == 1) {
        SymExpr inv = SymExpr::base_power(reg, k.powers[0].base, -k.powers[0].exp);
        GaussRational cinv = c.conj() * GaussRational(Rational(1) / (c.re * c.re + c.im * c.im));
        return inv * cinv;
      }
    }
  }
  if (a.is_polynomial())
    if (auto id = reg->find_base_by_poly(a.terms())) return SymExpr::base_power(reg, *id, Exponent(-1));
  throw Error(ErrorKind::InvalidInput, "symbol is not a registered positive base: " + a.to_infix());
}

enum class Side { Left, Right };

FormalSeries build_parametrix(const SymExpr& a, int n, Side side) {
  if (n < 1) throw Error(ErrorKind::InvalidParameter, "parametrix order must be >= 1");
  const RegistryPtr& reg = a.registry();
  SymExpr q0 = inverse_of(a);
  DerivativeCache ca(a);
  std::vector<DerivativeCache> cq;
  std::vector<SymExpr> q{q0};
  cq.emplace_back(q0);
  for (int j = 1; j < n; ++j) {
    SymExpr s(reg);
    for (int l = 1; l <= j; ++l) {
      auto& prev = cq[static_cast<std::size_t>(j - l)];
      s += side == Side::Left ? moyal_pairing(prev, ca, l) : moyal_pairing(ca, prev, l);
    }
    SymExpr qj = -(q0 * s);
    q.push_back(qj);
    cq.emplace_back(qj);
  }
  return FormalSeries(reg, std::move(q), false);
}

}  // namespace

FormalSeries parametrix(const SymExpr& a, int n) { return build_parametrix(a, n, Side::Left); }

FormalSeries right_parametrix(const SymExpr& a, int n) { return build_parametrix(a, n, Side::Right); }

int register_resolvent_bases(Registry& reg, const SymExpr& a0, const std::string& name) {
  if (!a0.is_polynomial()) throw Error(ErrorKind::InvalidInput, "a0 must be a polynomial");
  if (a0.depends_on(reg.var_lambda()) || a0.depends_on(reg.var_mu()))
    throw Error(ErrorKind::InvalidInput, "a0 may not depend on the spectral parameters");
  RegistryPtr self = a0.registry();
  SymExpr al = a0 + SymExpr::variable(self, reg.var_lambda());
  SymExpr am = a0 + SymExpr::variable(self, reg.var_mu());
  int id = reg.intern_base(name + "_lambda", al);
  reg.intern_base(name + "_mu", am);
  return id;
}

FormalSeries resolvent_parametrix(const SymExpr& a0, int n) {
  const RegistryPtr& reg = a0.registry();
  SymExpr al = a0 + SymExpr::variable(reg, reg->var_lambda());
  if (!reg->find_base_by_poly(al.terms()))
    throw Error(ErrorKind::InvalidInput, "a0 + lambda is not a registered base");
  return parametrix(al, n);
}

FormalSeries verify_left_identity(const FormalSeries& q, const SymExpr& a, int n) {
  return sharp(q, FormalSeries::symbol(a), n) - FormalSeries::unit(q.registry()).truncated(n);
}

FormalSeries verify_right_identity(const FormalSeries& q, const SymExpr& a, int n) {
  return sharp(FormalSeries::symbol(a), q, n) - FormalSeries::unit(q.registry()).truncated(n);
}

HypoProfile hypoellipticity_profile(const SymExpr& a, const WeightSequence& A, double rho,
                                    const std::vector<PhasePoint>& grid, int max_order) {
  if (!(rho > 0.0 && rho <= 1.0)) throw Error(ErrorKind::InvalidParameter, "rho must lie in (0, 1]");
  if (max_order < 0 || max_order > 8) throw Error(ErrorKind::InvalidParameter, "max_order must lie in [0, 8]");
  if (max_order > A.p_max()) throw Error(ErrorKind::InvalidParameter, "max_order exceeds the weight table");
  const RegistryPtr& reg = a.registry();
  const int d = reg->dim();
  HypoProfile prof;
  prof.rho = rho;
  prof.grid = grid;
  prof.max_order = max_order;

  CompiledExpr fa(a);
  std::vector<double> abs_a(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    abs_a[i] = std::abs(fa(grid[i]));
    if (!(abs_a[i] > 0.0) || !std::isfinite(abs_a[i]))
      throw Error(ErrorKind::DomainViolation, "symbol vanishes at grid point " + std::to_string(i));
  }

  DerivativeCache cache(a);
  double h = 0.0;
  for (int order = 0; order <= max_order; ++order) {
    for (const auto& alpha : multi_indices(2 * d, order)) {
      std::vector<int> counts(static_cast<std::size_t>(reg->num_vars()), 0);
      int nx = 0, nxi = 0;
      for (int i = 0; i < d; ++i) {
        counts[static_cast<std::size_t>(reg->var_x(i))] = alpha[static_cast<std::size_t>(i)];
        counts[static_cast<std::size_t>(reg->var_xi(i))] = alpha[static_cast<std::size_t>(d + i)];
        nx += alpha[static_cast<std::size_t>(i)];
        nxi += alpha[static_cast<std::size_t>(d + i)];
      }
      CompiledExpr fd(cache.get(counts));
      const double weight = std::exp(A.log_M(nx) + A.log_M(nxi));
      for (std::size_t i = 0; i < grid.size(); ++i) {
        double r = std::abs(fd(grid[i])) * std::pow(grid[i].japanese(), rho * order) / (weight * abs_a[i]);
        if (!std::isfinite(r)) throw Error(ErrorKind::NumericalFailure, "non-finite hypoellipticity ratio");
        prof.ratio_table.push_back({alpha, static_cast<int>(i), r});
        if (order >= 1 && r > 0.0) h = std::max(h, std::pow(r, 1.0 / order));
      }
    }
  }
  prof.fitted_h = h;
  double C = 0.0;
  for (const auto& row : prof.ratio_table) {
    int order = 0;
    for (int v : row.alpha) order += v;
    double scaled = order == 0 ? row.ratio : (h > 0.0 ? row.ratio / std::pow(h, order) : 0.0);
    C = std::max(C, scaled);
  }
  prof.fitted_C = C;

  // lower bound: |a| e^{M(m|x|)+M(m|xi|)} bounded below, with the infimum not
  // approached on the outer half of the grid
  std::vector<std::size_t> order_idx(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) order_idx[i] = i;
  std::sort(order_idx.begin(), order_idx.end(),
            [&](std::size_t l, std::size_t r) { return grid[l].japanese() < grid[r].japanese(); });
  auto M = [&](double r) { return r > 0.0 ? associated_function(A, r).value : 0.0; };
  prof.lower_bound_ok = !grid.empty();
  for (double m : {0.25, 1.0, 4.0}) {
    double inner_min = INFINITY, outer_min = INFINITY;
    for (std::size_t rank = 0; rank < order_idx.size(); ++rank) {
      const auto& w = grid[order_idx[rank]];
      double nx = 0.0, nxi = 0.0;
      for (double v : w.x) nx += v * v;
      for (double v : w.xi) nxi += v * v;
      double lv = std::log(abs_a[order_idx[rank]]) + M(m * std::sqrt(nx)) + M(m * std::sqrt(nxi));
      double& slot = rank < order_idx.size() / 2 ? inner_min : outer_min;
      slot = std::min(slot, lv);
    }
    double overall = std::min(inner_min, outer_min);
    prof.lower_bound_c.push_back(std::exp(overall));
    if (order_idx.size() >= 2 && outer_min < inner_min - 1e-9) prof.lower_bound_ok = false;
  }
  return prof;
}

}  // namespace weyl
