#pragma once

// Heat parametrix u_j = Q_j(t, w) e^{-t b(w)} for d_t + b^w, its transport
// residuals, resummation and derivative-bound profiles.

#include <vector>

#include "weyl/fsring.hpp"
#include "weyl/weights.hpp"

namespace weyl {

struct HeatTerm {
  int j = 0;
  SymExpr Q;  // polynomial in t with coefficients in the w-algebra, no exp atom
  SymExpr u;  // Q * exp(-t b)
};

/// b must be the registry's exponential symbol.
std::vector<HeatTerm> heat_terms(const SymExpr& b, int n);

/// d_t u_j + sum_{k+l=j} pairing_l(b, u_k); exactly zero for a correct recursion.
SymExpr pde_residual(const std::vector<HeatTerm>& terms, int j);

std::complex<double> heat_evaluate(const std::vector<HeatTerm>& terms, double t, const PhasePoint& w,
                                   const CutoffConfig& cfg, int n = -1);

struct FittedBound {
  double C = 0.0;
  double h = 0.0;
  std::size_t samples = 0;
  /// Points skipped because the bound's right-hand side vanishes there (Re b = 0).
  std::size_t skipped = 0;
};

struct HeatBoundProfile {
  /// |D_t^n D^alpha u_j| <= C n! h^{|alpha|+2j} A_{|alpha|+2j} (Re b)^n <w>^{-rho(|alpha|+2j)} e^{-t Re b / 4}
  FittedBound heat;
  /// |D_t^n D^alpha e^{-tb}| <= C 2^n h^{|alpha|} A_alpha <w>^{-rho|alpha|} |b|^n e^{-t Re b} sum_{r<=|alpha|} |t b|^r / r!
  FittedBound exp_bound;
  /// |D^alpha b^n| <= C 2^n h^{|alpha|} A_alpha <w>^{-rho|alpha|} |b|^n
  FittedBound power_bound;
};

HeatBoundProfile bound_profile(const std::vector<HeatTerm>& terms, const std::vector<PhasePoint>& grid,
                               const std::vector<double>& t_grid, int n_max, int alpha_max,
                               const WeightSequence& A, double rho);

/// One element of p(alpha, r): distinct non-zero multi-indices alpha^(j) in
/// increasing order with multiplicities k_j, sum k_j = r, sum k_j alpha^(j) = alpha.
struct FaaDiBrunoTerm {
  std::vector<std::vector<int>> parts;
  std::vector<int> mult;
};

std::vector<FaaDiBrunoTerm> faa_di_bruno_sets(const std::vector<int>& alpha, int r);

/// sum_{r=1}^{|beta|} binom(|beta|, r) sum_{p(beta,r)} r! / (k_1! ... k_n!), exact.
mpz_class faa_di_bruno_bound_lhs(const std::vector<int>& beta);

/// d^alpha of exp(-t b) through the p(alpha, r) expansion with the registry's
/// exponential symbol b.
SymExpr faa_di_bruno_exp(const RegistryPtr& reg, const std::vector<int>& counts);

}  // namespace weyl
