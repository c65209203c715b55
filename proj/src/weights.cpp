#include "weyl/weights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "weyl/error.hpp"

namespace weyl {

namespace {

bool le_slack(double lhs, double rhs) { return lhs <= rhs + kLogSlack * std::max(1.0, std::fabs(rhs)); }

// Largest value of f over [lo, hi], with its index.
std::pair<double, int> range_max(const std::vector<double>& f, int lo, int hi) {
  double best = -INFINITY;
  int arg = lo;
  for (int i = lo; i <= hi; ++i)
    if (f[static_cast<std::size_t>(i)] > best) {
      best = f[static_cast<std::size_t>(i)];
      arg = i;
    }
  return {best, arg};
}

}  // namespace

WeightSequence::WeightSequence(std::vector<double> log_values, std::optional<double> sigma)
    : log_values_(std::move(log_values)), sigma_(sigma) {
  if (log_values_.size() < 3) throw Error(ErrorKind::InvalidInput, "weight sequence needs p_max >= 2");
  for (double v : log_values_)
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidInput, "weight sequence has a non-finite entry");
  if (std::fabs(log_values_[0]) > kLogSlack || std::fabs(log_values_[1]) > kLogSlack)
    throw Error(ErrorKind::InvalidInput, "weight sequence must have M_0 = M_1 = 1");
  log_values_[0] = log_values_[1] = 0.0;
}

double WeightSequence::M(int p) const { return std::exp(log_M(p)); }

double WeightSequence::m(int p) const {
  if (p == 0) return 0.0;
  return std::exp(log_M(p) - log_M(p - 1));
}

std::vector<double> WeightSequence::m_values() const {
  std::vector<double> out(log_values_.size());
  for (int p = 0; p <= p_max(); ++p) out[static_cast<std::size_t>(p)] = m(p);
  return out;
}

WeightSequence WeightSequence::shifted(const std::vector<double>& r) const {
  if (static_cast<int>(r.size()) < p_max())
    throw Error(ErrorKind::InvalidInput, "subordinate sequence shorter than p_max");
  std::vector<double> lv = log_values_;
  double acc = 0.0;
  for (int p = 1; p <= p_max(); ++p) {
    acc += std::log(r[static_cast<std::size_t>(p - 1)]);
    lv[static_cast<std::size_t>(p)] += acc;
  }
  // keep the normalisation N_1 = 1 only when r_1 = 1; otherwise bypass the check
  WeightSequence out = *this;
  out.log_values_ = std::move(lv);
  out.sigma_.reset();
  return out;
}

WeightSequence make_gevrey(double sigma, int p_max) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidParameter, "Gevrey exponent must be positive");
  if (p_max < 2) throw Error(ErrorKind::InvalidParameter, "p_max must be at least 2");
  std::vector<double> lv(static_cast<std::size_t>(p_max) + 1);
  for (int p = 0; p <= p_max; ++p) lv[static_cast<std::size_t>(p)] = sigma * std::lgamma(p + 1.0);
  return WeightSequence(std::move(lv), sigma);
}

WeightSequence load_weight_sequence(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open weight file " + path);
  std::vector<double> lv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    int p;
    double v;
    if (!(ls >> p)) continue;
    if (!(ls >> v)) throw Error(ErrorKind::InvalidInput, path + ":" + std::to_string(lineno) + ": expected 'p ln(M_p)'");
    if (p != static_cast<int>(lv.size()))
      throw Error(ErrorKind::InvalidInput, path + ":" + std::to_string(lineno) + ": indices must run 0,1,2,...");
    lv.push_back(v);
  }
  return WeightSequence(std::move(lv));
}

ConditionReport check_conditions(const WeightSequence& ws) {
  ConditionReport r;
  const int P = ws.p_max();
  auto L = [&](int p) { return ws.log_M(p); };

  // (M.1) log-convexity
  r.holds_M1 = true;
  for (int p = 1; p < P; ++p)
    if (!le_slack(2.0 * L(p), L(p - 1) + L(p + 1))) {
      r.holds_M1 = false;
      r.witness_M1 = IndexPair{p - 1, p + 1};
      break;
    }

  // (M.4) log-convexity of M_p / p!
  r.holds_M4 = true;
  auto L4 = [&](int p) { return L(p) - std::lgamma(p + 1.0); };
  for (int p = 1; p < P; ++p)
    if (!le_slack(2.0 * L4(p), L4(p - 1) + L4(p + 1))) {
      r.holds_M4 = false;
      r.witness_M4 = IndexPair{p - 1, p + 1};
      break;
    }

  // (M.2) M_p <= c0 H^p min_q M_q M_{p-q}; with c0 = 1 the smallest H is
  // exp(max_p g_p / p), g_p = max_q (L_p - L_q - L_{p-q}). A bounded g_p / p
  // cannot be certified on a finite range; we require that the last quarter
  // not raise the running maximum by more than 5%.
  std::vector<double> growth(static_cast<std::size_t>(P) + 1, 0.0);
  std::vector<int> growth_q(static_cast<std::size_t>(P) + 1, 0);
  for (int p = 1; p <= P; ++p) {
    double g = -INFINITY;
    int qa = 0;
    for (int q = 0; q <= p; ++q) {
      double v = L(p) - L(q) - L(p - q);
      if (v > g) {
        g = v;
        qa = q;
      }
    }
    growth[static_cast<std::size_t>(p)] = g / p;
    growth_q[static_cast<std::size_t>(p)] = qa;
  }
  const int split = std::max(1, (3 * P) / 4);
  auto [head_max, head_arg] = range_max(growth, 1, split);
  auto [tail_max, tail_arg] = range_max(growth, std::min(split + 1, P), P);
  (void)head_arg;
  double all_max = std::max({0.0, head_max, tail_max});
  r.fitted_c0 = 1.0;
  r.fitted_H = std::exp(all_max);
  r.holds_M2 = tail_max <= std::max(0.0, head_max) * 1.05 + kLogSlack;
  if (!r.holds_M2) r.witness_M2 = IndexPair{tail_arg, growth_q[static_cast<std::size_t>(tail_arg)]};

  // (M.3)' and (M.3) on truncated tails
  r.truncation_index = P;
  std::vector<double> inv_m(static_cast<std::size_t>(P) + 1, 0.0);  // M_{p-1}/M_p
  for (int p = 1; p <= P; ++p) inv_m[static_cast<std::size_t>(p)] = std::exp(L(p - 1) - L(p));
  std::vector<double> tail(static_cast<std::size_t>(P) + 2, 0.0);  // tail[q] = sum_{p=q+1}^{P}
  for (int q = P - 1; q >= 0; --q) tail[static_cast<std::size_t>(q)] = tail[static_cast<std::size_t>(q) + 1] + inv_m[static_cast<std::size_t>(q) + 1];
  const int q2 = P / 2, q4 = P / 4;
  double far = tail[static_cast<std::size_t>(q2)];
  double near = tail[static_cast<std::size_t>(q4)] - far;
  r.holds_M3prime = far < 0.99 * near;
  if (!r.holds_M3prime) r.witness_M3prime = IndexPair{q4, P};

  // (M.3): tail(q) <= c q M_q / M_{q+1}
  std::vector<double> ratio(static_cast<std::size_t>(q2) + 1, 0.0);
  for (int q = 1; q <= q2; ++q)
    ratio[static_cast<std::size_t>(q)] = tail[static_cast<std::size_t>(q)] / (q * inv_m[static_cast<std::size_t>(q) + 1]);
  auto [r_head, r_head_arg] = range_max(ratio, 1, std::max(1, q4));
  auto [r_tail, r_tail_arg] = range_max(ratio, std::min(q4 + 1, q2), q2);
  (void)r_head_arg;
  bool bounded = r_tail <= 1.5 * r_head + kLogSlack;
  r.holds_M3 = r.holds_M3prime && bounded;
  if (!r.holds_M3) r.witness_M3 = bounded ? IndexPair{q4, P} : IndexPair{r_tail_arg, P};
  return r;
}

SubordinateSequence::SubordinateSequence(std::vector<double> r_values) : r_(std::move(r_values)) {
  if (r_.empty()) throw Error(ErrorKind::InvalidInput, "empty subordinate sequence");
  for (std::size_t i = 0; i < r_.size(); ++i) {
    if (!(r_[i] > 0.0) || !std::isfinite(r_[i]))
      throw Error(ErrorKind::InvalidInput, "subordinate sequence entries must be positive");
    if (i > 0 && r_[i] < r_[i - 1])
      throw Error(ErrorKind::InvalidInput, "subordinate sequence must be non-decreasing");
  }
}

namespace {

AssociatedValue sup_log(const std::vector<double>& log_den, double rho) {
  if (!(rho > 0.0)) throw Error(ErrorKind::InvalidParameter, "rho must be positive");
  const double lr = std::log(rho);
  AssociatedValue out;
  for (std::size_t p = 0; p < log_den.size(); ++p) {
    double v = static_cast<double>(p) * lr - log_den[p];
    if (v > out.value) {
      out.value = v;
      out.argmax = static_cast<int>(p);
    }
  }
  out.boundary_hit = out.value > 0.0 && out.argmax == static_cast<int>(log_den.size()) - 1;
  return out;
}

}  // namespace

AssociatedValue associated_function(const WeightSequence& ws, double rho) {
  return sup_log(ws.log_values(), rho);
}

AssociatedValue associated_function_shifted(const WeightSequence& ws, const SubordinateSequence& r,
                                            double rho) {
  if (static_cast<int>(r.values().size()) < ws.p_max())
    throw Error(ErrorKind::InvalidInput, "subordinate sequence shorter than p_max");
  std::vector<double> den = ws.log_values();
  double acc = 0.0;
  for (int p = 1; p <= ws.p_max(); ++p) {
    acc += std::log(r.values()[static_cast<std::size_t>(p - 1)]);
    den[static_cast<std::size_t>(p)] += acc;
  }
  return sup_log(den, rho);
}

std::optional<LemmaViolation> check_binomial_lemma(const WeightSequence& n, int max_order) {
  if (max_order > n.p_max()) throw Error(ErrorKind::InvalidParameter, "max_order exceeds p_max");
  for (int a = 2; a <= max_order; ++a)
    for (int b = 1; b <= a - 1; ++b) {
      double lhs = std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0) + n.log_M(a - b) + n.log_M(b);
      double rhs = std::log(static_cast<double>(a)) + n.log_M(a - 1);
      if (!le_slack(lhs, rhs)) return LemmaViolation{{a, b}, lhs, rhs};
    }
  return std::nullopt;
}

std::optional<LemmaViolation> check_product_lemma(const WeightSequence& n, int k_max) {
  if (k_max > n.p_max()) throw Error(ErrorKind::InvalidParameter, "k_max exceeds p_max");
  std::optional<LemmaViolation> found;
  std::vector<int> parts;
  // enumerate compositions of k into positive parts
  std::function<void(int, int, double)> rec = [&](int k, int left, double acc) {
    if (found) return;
    if (left == 0) {
      int j = static_cast<int>(parts.size());
      double lhs = n.log_M(j) + acc;
      double rhs = n.log_M(k);
      if (!le_slack(lhs, rhs)) {
        std::vector<int> idx{k, j};
        idx.insert(idx.end(), parts.begin(), parts.end());
        found = LemmaViolation{idx, lhs, rhs};
      }
      return;
    }
    for (int part = 1; part <= left; ++part) {
      parts.push_back(part);
      rec(k, left - part, acc + n.log_M(part));
      parts.pop_back();
    }
  };
  for (int k = 1; k <= k_max && !found; ++k) rec(k, k, 0.0);
  return found;
}

}  // namespace weyl
