#pragma once

// Weight sequences M_p (tabulated as ln M_p), their defining conditions
// (M.1)-(M.4) on the tabulated range, and the associated functions.

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace weyl {

inline constexpr int kDefaultPMax = 200;
inline constexpr double kLogSlack = 1e-12;

class WeightSequence {
 public:
  /// log_values[p] = ln M_p; requires M_0 = M_1 = 1 and at least three entries.
  explicit WeightSequence(std::vector<double> log_values, std::optional<double> sigma = {});

  int p_max() const { return static_cast<int>(log_values_.size()) - 1; }
  const std::vector<double>& log_values() const { return log_values_; }
  std::optional<double> sigma() const { return sigma_; }

  double log_M(int p) const { return log_values_.at(static_cast<std::size_t>(p)); }
  double M(int p) const;
  /// m_p = M_p / M_{p-1}, with m_0 = 0.
  double m(int p) const;
  std::vector<double> m_values() const;

  /// N_p = M_p * r_1 * ... * r_p
  WeightSequence shifted(const std::vector<double>& r) const;

 private:
  std::vector<double> log_values_;
  std::optional<double> sigma_;
};

/// M_p = p!^sigma
WeightSequence make_gevrey(double sigma, int p_max = kDefaultPMax);

/// Two-column text: "p ln(M_p)" per line, '#' comments allowed, p = 0..p_max contiguous.
WeightSequence load_weight_sequence(const std::string& path);

using IndexPair = std::pair<int, int>;

struct ConditionReport {
  bool holds_M1 = false;
  bool holds_M2 = false;
  bool holds_M3 = false;
  bool holds_M3prime = false;
  bool holds_M4 = false;
  std::optional<IndexPair> witness_M1, witness_M2, witness_M3, witness_M3prime, witness_M4;
  double fitted_c0 = 1.0;
  double fitted_H = 1.0;
  /// Index at which the (M.3)/(M.3)' tail sums were truncated.
  int truncation_index = 0;
};

ConditionReport check_conditions(const WeightSequence& ws);

class SubordinateSequence {
 public:
  /// r_p for p = 1..n, positive and non-decreasing.
  explicit SubordinateSequence(std::vector<double> r_values);
  const std::vector<double>& values() const { return r_; }

 private:
  std::vector<double> r_;
};

struct AssociatedValue {
  double value = 0.0;
  int argmax = 0;
  /// The sup was attained at p_max; the true value may be larger.
  bool boundary_hit = false;
};

/// M(rho) = max_p ln_+(rho^p / M_p) over the tabulated range.
AssociatedValue associated_function(const WeightSequence& ws, double rho);
/// N_{r_p}(rho) = max_p ln_+(rho^p / (M_p r_1...r_p)).
AssociatedValue associated_function_shifted(const WeightSequence& ws, const SubordinateSequence& r,
                                            double rho);

struct LemmaViolation {
  std::vector<int> indices;
  double lhs_log = 0.0;
  double rhs_log = 0.0;
};

/// binom(a, b) N_{a-b} N_b <= a N_{a-1} for 1 <= b <= a-1, a <= max_order.
std::optional<LemmaViolation> check_binomial_lemma(const WeightSequence& n, int max_order);
/// N_j N_{k_1} ... N_{k_j} <= N_k over all compositions k_1+...+k_j = k, j <= k <= k_max.
std::optional<LemmaViolation> check_product_lemma(const WeightSequence& n, int k_max);

}  // namespace weyl
