#pragma once

// Truncated formal series sum_j a_j (term j of order 2j) with the Weyl sharp
// product, change of quantization and cutoff resummation.

#include <complex>
#include <map>
#include <vector>

#include "weyl/symexpr.hpp"

namespace weyl {

class WeightSequence;

inline constexpr int kDefaultOrder = 6;

class FormalSeries {
 public:
  /// `closed` marks every term past the stored ones as exactly zero (e.g. a
  /// single symbol); otherwise the series is only known up to its order.
  FormalSeries(RegistryPtr reg, std::vector<SymExpr> terms, bool closed = false);

  static FormalSeries unit(RegistryPtr reg);
  static FormalSeries symbol(const SymExpr& a);

  const RegistryPtr& registry() const { return reg_; }
  int dim() const { return reg_->dim(); }
  int order() const { return static_cast<int>(terms_.size()); }
  bool closed() const { return closed_; }
  /// Largest order this series can feed without zero-padding unknown terms.
  int available() const;

  /// Term j; zero past the stored terms of a closed series.
  SymExpr term(int j) const;
  const std::vector<SymExpr>& terms() const { return terms_; }

  FormalSeries truncated(int n) const;
  FormalSeries operator-() const;
  FormalSeries& operator+=(const FormalSeries& o);
  FormalSeries& operator-=(const FormalSeries& o);
  FormalSeries& operator*=(const GaussRational& c);
  friend FormalSeries operator+(FormalSeries a, const FormalSeries& b) { return a += b; }
  friend FormalSeries operator-(FormalSeries a, const FormalSeries& b) { return a -= b; }
  friend FormalSeries operator*(FormalSeries a, const GaussRational& c) { return a *= c; }
  friend FormalSeries operator*(const GaussRational& c, FormalSeries a) { return a *= c; }

  /// Every stored term structurally zero.
  bool is_zero() const;
  bool vanishes_identically() const;

  FormalSeries map(SymExpr (*f)(const SymExpr&)) const;

 private:
  RegistryPtr reg_;
  std::vector<SymExpr> terms_;
  bool closed_ = false;
};

/// Memoised mixed partial derivatives of one expression, keyed by the
/// derivative count per variable.
class DerivativeCache {
 public:
  explicit DerivativeCache(SymExpr e);
  const SymExpr& get(const std::vector<int>& counts);
  const SymExpr& base() const { return root_; }

 private:
  SymExpr root_;
  std::map<std::vector<int>, SymExpr> cache_;
};

/// Order-l Moyal pairing
///   sum_{|alpha+beta|=l} (-1)^|beta| / (alpha! beta! 2^l) d_xi^alpha D_x^beta a * d_xi^beta D_x^alpha b
SymExpr moyal_pairing(DerivativeCache& a, DerivativeCache& b, int l);
SymExpr moyal_pairing(const SymExpr& a, const SymExpr& b, int l);

/// c_j = sum_{s+k+l=j} pairing_l(a_s, b_k), j < n
FormalSeries sharp(const FormalSeries& a, const FormalSeries& b, int n);
FormalSeries sharp_power(const FormalSeries& a, int k, int n);

/// Coefficients of the tau -> tau1 requantization:
///   p_j = sum_{k+|beta|=j} (tau1-tau)^|beta| / beta! d_xi^beta D_x^beta a_k
FormalSeries change_quantization(const FormalSeries& a, const Rational& tau, const Rational& tau1, int n);

struct CutoffConfig {
  double R = 4.0;
  std::vector<double> m_values;  // m_0 = 0, m_p = M_p / M_{p-1}
  double bump_inner = 2.0;
  double bump_outer = 3.0;

  static CutoffConfig from_weights(const WeightSequence& ws, double R);
  void validate() const;
};

/// psi(s): 1 for s <= inner, 0 for s >= outer, integrated exp(-1/((outer-s)(s-inner))) bump between.
double cutoff_psi(double s, double inner = 2.0, double outer = 3.0);
/// chi_{n,R}(w) = psi(<x/(R m_n)>) psi(<xi/(R m_n)>), chi_{0,R} = 0
double cutoff_chi(int n, const CutoffConfig& cfg, const PhasePoint& w);

enum class ResumStrategy { Cutoff, SmallestTerm };

/// Resums precomputed term values a_j(w).
std::complex<double> resum_values(const std::vector<std::complex<double>>& values, const CutoffConfig& cfg,
                                  const PhasePoint& w, ResumStrategy strategy);
std::complex<double> resum_evaluate(const FormalSeries& a, const CutoffConfig& cfg, const PhasePoint& w,
                                    ResumStrategy strategy = ResumStrategy::Cutoff);

/// Evaluates all terms of a series at many points.
class CompiledSeries {
 public:
  explicit CompiledSeries(const FormalSeries& a);
  std::vector<std::complex<double>> operator()(const PhasePoint& p) const;
  int order() const { return static_cast<int>(terms_.size()); }

 private:
  std::vector<CompiledExpr> terms_;
};

}  // namespace weyl
