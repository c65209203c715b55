#include "weyl/fsring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "weyl/numerics.hpp"
#include "weyl/weights.hpp"

namespace weyl {

FormalSeries::FormalSeries(RegistryPtr reg, std::vector<SymExpr> terms, bool closed)
    : reg_(std::move(reg)), terms_(std::move(terms)), closed_(closed) {
  if (terms_.empty()) throw Error(ErrorKind::InvalidInput, "formal series needs at least one term");
  for (const auto& t : terms_)
    if (t.registry() != reg_) throw Error(ErrorKind::InvalidInput, "series terms from different registries");
}

FormalSeries FormalSeries::unit(RegistryPtr reg) {
  auto one = SymExpr::constant(reg, GaussRational(1));
  return FormalSeries(std::move(reg), {one}, true);
}

FormalSeries FormalSeries::symbol(const SymExpr& a) { return FormalSeries(a.registry(), {a}, true); }

int FormalSeries::available() const { return closed_ ? std::numeric_limits<int>::max() : order(); }

SymExpr FormalSeries::term(int j) const {
  if (j < 0) throw Error(ErrorKind::InvalidInput, "negative series index");
  if (j < order()) return terms_[static_cast<std::size_t>(j)];
  if (closed_) return SymExpr(reg_);
  throw Error(ErrorKind::InvalidInput,
              "series term " + std::to_string(j) + " requested but only " + std::to_string(order()) + " are known");
}

FormalSeries FormalSeries::truncated(int n) const {
  if (n < 1) throw Error(ErrorKind::InvalidParameter, "truncation order must be >= 1");
  if (n > available()) throw Error(ErrorKind::InvalidInput, "cannot extend an open series past its order");
  std::vector<SymExpr> t;
  for (int j = 0; j < n; ++j) t.push_back(term(j));
  return FormalSeries(reg_, std::move(t), false);
}

FormalSeries FormalSeries::operator-() const {
  FormalSeries r = *this;
  for (auto& t : r.terms_) t = -t;
  return r;
}

FormalSeries& FormalSeries::operator+=(const FormalSeries& o) {
  if (o.reg_ != reg_) throw Error(ErrorKind::InvalidInput, "series from different registries");
  int n = std::max(order(), o.order());
  bool closed = closed_ && o.closed_;
  if (!closed) n = std::min(available(), o.available());
  std::vector<SymExpr> t;
  for (int j = 0; j < n; ++j) t.push_back(term(j) + o.term(j));
  terms_ = std::move(t);
  closed_ = closed;
  return *this;
}

FormalSeries& FormalSeries::operator-=(const FormalSeries& o) { return *this += -o; }

FormalSeries& FormalSeries::operator*=(const GaussRational& c) {
  for (auto& t : terms_) t *= c;
  return *this;
}

bool FormalSeries::is_zero() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const SymExpr& t) { return t.is_zero(); });
}

bool FormalSeries::vanishes_identically() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const SymExpr& t) { return t.vanishes_identically(); });
}

FormalSeries FormalSeries::map(SymExpr (*f)(const SymExpr&)) const {
  FormalSeries r = *this;
  for (auto& t : r.terms_) t = f(t);
  return r;
}

// ---------------------------------------------------------------- derivatives

DerivativeCache::DerivativeCache(SymExpr e) : root_(std::move(e)) {}

const SymExpr& DerivativeCache::get(const std::vector<int>& counts) {
  auto it = cache_.find(counts);
  if (it != cache_.end()) return it->second;
  int v = -1;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0) v = static_cast<int>(i);
  if (v < 0) return root_;
  std::vector<int> lower = counts;
  lower[static_cast<std::size_t>(v)] -= 1;
  SymExpr d = get(lower).differentiate(v);
  return cache_.emplace(counts, std::move(d)).first->second;
}

namespace {

std::vector<int> counts_for(const Registry& reg, const std::vector<int>& dxi, const std::vector<int>& dx) {
  std::vector<int> c(static_cast<std::size_t>(reg.num_vars()), 0);
  for (int i = 0; i < reg.dim(); ++i) {
    c[static_cast<std::size_t>(reg.var_x(i))] = dx[static_cast<std::size_t>(i)];
    c[static_cast<std::size_t>(reg.var_xi(i))] = dxi[static_cast<std::size_t>(i)];
  }
  return c;
}

int total(const std::vector<int>& a) {
  int s = 0;
  for (int v : a) s += v;
  return s;
}

}  // namespace

SymExpr moyal_pairing(DerivativeCache& a, DerivativeCache& b, int l) {
  const RegistryPtr& reg = a.base().registry();
  const int d = reg->dim();
  SymExpr out(reg);
  if (a.base().is_zero() || b.base().is_zero()) return out;
  for (int la = 0; la <= l; ++la) {
    auto alphas = multi_indices(d, la);
    auto betas = multi_indices(d, l - la);
    for (const auto& alpha : alphas)
      for (const auto& beta : betas) {
        const SymExpr& da = a.get(counts_for(*reg, alpha, beta));
        if (da.is_zero()) continue;
        const SymExpr& db = b.get(counts_for(*reg, beta, alpha));
        if (db.is_zero()) continue;
        // (-1)^|beta| (-i)^l / (alpha! beta! 2^l), the (-i)^l from D_x^beta and D_x^alpha
        mpz_class den = 1;
        for (int v : alpha)
          for (int k = 2; k <= v; ++k) den *= k;
        for (int v : beta)
          for (int k = 2; k <= v; ++k) den *= k;
        den <<= l;
        GaussRational c = minus_i_pow(l) * GaussRational(Rational(total(beta) % 2 ? -1 : 1, 1) / Rational(den));
        out += (da * db) * c;
      }
  }
  return out;
}

SymExpr moyal_pairing(const SymExpr& a, const SymExpr& b, int l) {
  DerivativeCache ca(a), cb(b);
  return moyal_pairing(ca, cb, l);
}

FormalSeries sharp(const FormalSeries& a, const FormalSeries& b, int n) {
  if (a.registry() != b.registry()) throw Error(ErrorKind::InvalidInput, "sharp of series with different registries");
  if (n < 1) throw Error(ErrorKind::InvalidParameter, "order must be >= 1");
  if (n > a.available() || n > b.available())
    throw Error(ErrorKind::InvalidInput, "sharp order " + std::to_string(n) + " exceeds the known terms of an operand");
  const RegistryPtr& reg = a.registry();
  std::vector<DerivativeCache> ca, cb;
  for (int s = 0; s < n; ++s) {
    ca.emplace_back(a.term(s));
    cb.emplace_back(b.term(s));
  }
  std::vector<SymExpr> c;
  for (int j = 0; j < n; ++j) {
    SymExpr cj(reg);
    for (int s = 0; s <= j; ++s)
      for (int k = 0; s + k <= j; ++k) {
        int l = j - s - k;
        cj += moyal_pairing(ca[static_cast<std::size_t>(s)], cb[static_cast<std::size_t>(k)], l);
      }
    c.push_back(std::move(cj));
  }
  return FormalSeries(reg, std::move(c), false);
}

FormalSeries sharp_power(const FormalSeries& a, int k, int n) {
  if (k < 0) throw Error(ErrorKind::InvalidParameter, "sharp power needs k >= 0");
  if (k == 0) return FormalSeries::unit(a.registry()).truncated(n);
  FormalSeries acc = a.truncated(n);
  for (int i = 1; i < k; ++i) acc = sharp(acc, a, n);
  return acc;
}

FormalSeries change_quantization(const FormalSeries& a, const Rational& tau, const Rational& tau1, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidParameter, "order must be >= 1");
  if (n > a.available()) throw Error(ErrorKind::InvalidInput, "order exceeds the known terms of the series");
  const RegistryPtr& reg = a.registry();
  const int d = reg->dim();
  const Rational delta = tau1 - tau;
  std::vector<DerivativeCache> ca;
  for (int k = 0; k < n; ++k) ca.emplace_back(a.term(k));
  std::vector<SymExpr> p;
  for (int j = 0; j < n; ++j) {
    SymExpr pj(reg);
    for (int k = 0; k <= j; ++k) {
      int b = j - k;
      Rational dp = 1;
      for (int i = 0; i < b; ++i) dp *= delta;
      for (const auto& beta : multi_indices(d, b)) {
        mpz_class den = 1;
        for (int v : beta)
          for (int q = 2; q <= v; ++q) den *= q;
        const SymExpr& da = ca[static_cast<std::size_t>(k)].get(counts_for(*reg, beta, beta));
        if (da.is_zero()) continue;
        pj += da * (minus_i_pow(b) * GaussRational(dp / Rational(den)));
      }
    }
    p.push_back(std::move(pj));
  }
  return FormalSeries(reg, std::move(p), false);
}

// ---------------------------------------------------------------- cutoffs

CutoffConfig CutoffConfig::from_weights(const WeightSequence& ws, double R) {
  CutoffConfig c;
  c.R = R;
  c.m_values = ws.m_values();
  c.validate();
  return c;
}

void CutoffConfig::validate() const {
  if (!(R > 0.0)) throw Error(ErrorKind::InvalidParameter, "cutoff radius R must be positive");
  if (m_values.size() < 2) throw Error(ErrorKind::InvalidParameter, "cutoff needs m_1");
  for (std::size_t i = 2; i < m_values.size(); ++i)
    if (m_values[i] < m_values[i - 1] * (1.0 - 1e-12))
      throw Error(ErrorKind::InvalidParameter, "m_p must be non-decreasing");
  if (!(bump_inner > 1.0 && bump_outer > bump_inner))
    throw Error(ErrorKind::InvalidParameter, "cutoff shells must satisfy 1 < inner < outer");
}

namespace {

double bump_integral(double lo, double hi, double inner, double outer) {
  static const GaussRule unit = gauss_legendre(64, 0.0, 1.0);
  double s = 0.0;
  for (std::size_t i = 0; i < unit.nodes.size(); ++i) {
    double u = lo + (hi - lo) * unit.nodes[i];
    double q = (outer - u) * (u - inner);
    if (q > 0.0) s += unit.weights[i] * std::exp(-1.0 / q);
  }
  return s * (hi - lo);
}

}  // namespace

double cutoff_psi(double s, double inner, double outer) {
  if (s <= inner) return 1.0;
  if (s >= outer) return 0.0;
  double total_mass = bump_integral(inner, outer, inner, outer);
  double part = bump_integral(inner, s, inner, outer);
  return std::clamp(1.0 - part / total_mass, 0.0, 1.0);
}

double cutoff_chi(int n, const CutoffConfig& cfg, const PhasePoint& w) {
  if (n < 0) throw Error(ErrorKind::InvalidParameter, "cutoff index must be >= 0");
  if (n == 0) return 0.0;
  if (n >= static_cast<int>(cfg.m_values.size()))
    throw Error(ErrorKind::InvalidParameter, "cutoff index past the tabulated m_p");
  const double scale = cfg.R * cfg.m_values[static_cast<std::size_t>(n)];
  double sx = 1.0, sxi = 1.0;
  for (double v : w.x) sx += (v / scale) * (v / scale);
  for (double v : w.xi) sxi += (v / scale) * (v / scale);
  double px = cutoff_psi(std::sqrt(sx), cfg.bump_inner, cfg.bump_outer);
  if (px == 0.0) return 0.0;
  return px * cutoff_psi(std::sqrt(sxi), cfg.bump_inner, cfg.bump_outer);
}

std::complex<double> resum_values(const std::vector<std::complex<double>>& values, const CutoffConfig& cfg,
                                  const PhasePoint& w, ResumStrategy strategy) {
  std::complex<double> s = 0.0;
  if (strategy == ResumStrategy::Cutoff) {
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (values[j] == 0.0) continue;
      double chi = cutoff_chi(static_cast<int>(j), cfg, w);
      s += (1.0 - chi) * values[j];
    }
    return s;
  }
  // exactly vanishing terms (e.g. q_1) carry no size information and are skipped
  std::size_t stop = values.size();
  double best = INFINITY;
  for (std::size_t j = 1; j < values.size(); ++j)
    if (values[j] != 0.0 && std::abs(values[j]) < best) {
      best = std::abs(values[j]);
      stop = j;
    }
  for (std::size_t j = 0; j < stop; ++j) s += values[j];
  return s;
}

std::complex<double> resum_evaluate(const FormalSeries& a, const CutoffConfig& cfg, const PhasePoint& w,
                                    ResumStrategy strategy) {
  return resum_values(CompiledSeries(a)(w), cfg, w, strategy);
}

CompiledSeries::CompiledSeries(const FormalSeries& a) {
  for (const auto& t : a.terms()) terms_.emplace_back(t);
}

std::vector<std::complex<double>> CompiledSeries::operator()(const PhasePoint& p) const {
  std::vector<std::complex<double>> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) out.push_back(t(p));
  return out;
}

}  // namespace weyl
