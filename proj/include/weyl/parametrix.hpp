#pragma once

#include <optional>
#include <vector>

#include "weyl/fsring.hpp"
#include "weyl/weights.hpp"

namespace weyl {

struct HypoRow {
  std::vector<int> alpha;  // derivative counts over (x_1..x_d, xi_1..xi_d)
  int point = 0;           // index into the profile grid
  double ratio = 0.0;
};

struct HypoProfile {
  double rho = 1.0;
  std::vector<PhasePoint> grid;
  int max_order = 0;
  std::vector<HypoRow> ratio_table;
  double fitted_h = 0.0;
  double fitted_C = 1.0;
  bool lower_bound_ok = false;
  /// min over the grid of |a| e^{M(m|x|)+M(m|xi|)} for m = 1/4, 1, 4
  std::vector<double> lower_bound_c;
};

/// Hypoellipticity evidence on a finite grid (lower bound and derivative ratios):
///   ratio = |D^alpha a(w)| <w>^{rho|alpha|} / (A_{|alpha_x|} A_{|alpha_xi|} |a(w)|)
HypoProfile hypoellipticity_profile(const SymExpr& a, const WeightSequence& A, double rho,
                                    const std::vector<PhasePoint>& grid, int max_order);

/// Left parametrix q with q # a = 1: q_0 = a^{-1},
///   q_j = -q_0 sum_{s=1}^{j} pairing_s(q_{j-s}, a).
/// a must be a non-zero constant, a registered base polynomial, or B^1 for a registered B.
FormalSeries parametrix(const SymExpr& a, int n);
/// Right parametrix with a # q = 1.
FormalSeries right_parametrix(const SymExpr& a, int n);

/// Registers a0 + lambda and a0 + mu (named <name>_lambda, <name>_mu) and returns the lambda base id.
int register_resolvent_bases(Registry& reg, const SymExpr& a0, const std::string& name);
/// Parametrix of a_lambda = a0 + lambda with lambda kept formal.
FormalSeries resolvent_parametrix(const SymExpr& a0, int n);

/// (q # a) - 1 truncated to n terms.
FormalSeries verify_left_identity(const FormalSeries& q, const SymExpr& a, int n);
/// (a # q) - 1 truncated to n terms.
FormalSeries verify_right_identity(const FormalSeries& q, const SymExpr& a, int n);

}  // namespace weyl
