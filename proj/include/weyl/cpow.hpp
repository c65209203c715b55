#pragma once

// Balakrishnan complex powers: gamma_k(z), half-line quadrature with the
// lambda^{z-1} weight and the coefficients p_{z,j}(w).

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "weyl/fsring.hpp"
#include "weyl/numerics.hpp"

namespace weyl {

/// gamma_k(z) = Gamma(k) / (Gamma(z) Gamma(k - z))
cplx gamma_k(cplx z, int k);

/// Trapezoid rule in u = ln(lambda). The bounds are starting values: they are
/// pushed outwards in steps of 10 until the estimated tail is negligible.
struct QuadratureScheme {
  double u_min = -40.0;
  double u_max = 40.0;
  double step = 0.05;
  int refine = 2;

  void validate() const;
};

struct QuadResult {
  cplx value = 0.0;
  double error = 0.0;
  /// Integrand did not decay within the extension limit.
  bool warning = false;
  double u_lo = 0.0;
  double u_hi = 0.0;
};

/// int_0^inf lambda^{z-1} f(lambda) dlambda
QuadResult quad_halfline(const std::function<cplx(double)>& f, cplx z, const QuadratureScheme& quad = {});

struct PositivizeResult {
  SymExpr a0;
  double shift = 0.0;
  /// Smallest B with Re a0 > -B |Im a0| on the grid.
  double sector_B = 0.0;
};

/// a0 = a + c with the smallest c in {0, 1, 2, 4, ...} making Re a0 > 0 on the grid.
PositivizeResult positivize(const SymExpr& a, const std::vector<PhasePoint>& grid);

/// Integrand series G = a0^{#k} # (sum_j q^{(lambda)}_j)^{#k} (or any series in
/// (w, lambda) whose lambda dependence is lambda^m (a0+lambda)^{-r}), compiled
/// into per-(m, r) groups for fast quadrature.
class PowerIntegrand {
 public:
  /// Builds G for a0 (a registered base with a0 + lambda registered).
  PowerIntegrand(const SymExpr& a0, int k, int order);
  /// Uses a caller-supplied series in place of G.
  PowerIntegrand(const SymExpr& a0, int k, FormalSeries integrand);

  static FormalSeries balakrishnan_series(const SymExpr& a0, int k, int order);

  int k() const { return k_; }
  int order() const { return series_.order(); }
  const FormalSeries& series() const { return series_; }
  const SymExpr& a0() const { return a0_; }

  struct Group {
    int m = 0;     // power of lambda
    double r = 0;  // power of (a0 + lambda)^{-1}
  };
  const std::vector<Group>& groups() const { return groups_; }

  /// V_{j,g}(w): the lambda-free factor of group g in term j.
  void group_values(const PhasePoint& w, std::vector<std::vector<cplx>>& out) const;
  double a0_value(const PhasePoint& w) const { return a0c_(w).real(); }

 private:
  void compile();

  SymExpr a0_;
  int k_;
  int lambda_base_ = -1;
  FormalSeries series_;
  std::vector<Group> groups_;
  // per term: list of (group index, compiled lambda-free factor)
  std::vector<std::vector<std::pair<int, CompiledExpr>>> plan_;
  CompiledExpr a0c_;
};

class PowerEvaluator {
 public:
  PowerEvaluator(std::shared_ptr<const PowerIntegrand> integrand, cplx z, QuadratureScheme quad = {});

  cplx z() const { return z_; }
  int k() const { return integrand_->k(); }
  int order() const { return integrand_->order(); }
  const PowerIntegrand& integrand() const { return *integrand_; }

  /// p_{z,j}(w) for all j < order, with quadrature error estimates.
  std::vector<QuadResult> coefficients(const PhasePoint& w) const;
  QuadResult coefficient(int j, const PhasePoint& w) const;

 private:
  struct GroupIntegrals {
    std::vector<cplx> value;
    std::vector<double> error;
    bool warning = false;
  };
  const GroupIntegrals& integrals(double A) const;

  std::shared_ptr<const PowerIntegrand> integrand_;
  cplx z_;
  cplx gamma_;
  QuadratureScheme quad_;
  mutable std::mutex mu_;
  mutable std::map<double, GroupIntegrals> cache_;  // keyed by a0(w)
};

/// sum_{j<n} (1 - chi_{j,R}(w)) p_{z,j}(w)
cplx power_series_eval(const PowerEvaluator& ev, int n, const PhasePoint& w, const CutoffConfig& cfg);

struct TwoVarResult {
  cplx lhs = 0.0;
  cplx rhs = 0.0;
  double lhs_error = 0.0;
  double rhs_error = 0.0;
  bool warning = false;
};

/// gamma_1(z) gamma_1(zeta) \iint lambda^{z-1} mu^{zeta-1} (f(lambda)-f(mu))/(lambda-mu)
/// against gamma_2(z+zeta) \int lambda^{z+zeta-1} f'(lambda).
TwoVarResult two_var_identity_check(const std::function<cplx(double)>& f, const std::function<cplx(double)>& df,
                                    cplx z, cplx zeta, const QuadratureScheme& quad2d = {-40.0, 40.0, 0.1, 1});

}  // namespace weyl
