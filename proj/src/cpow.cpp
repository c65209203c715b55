#include "weyl/cpow.hpp"

#include <algorithm>
#include <cmath>

#include "weyl/kernels.hpp"
#include "weyl/parametrix.hpp"

namespace weyl {

namespace {

constexpr double kTailTol = 1e-17;
constexpr int kMaxExtensions = 100;

bool is_nonpositive_integer(cplx v) {
  return std::fabs(v.imag()) < 1e-14 && v.real() < 0.5 && std::fabs(v.real() - std::round(v.real())) < 1e-14;
}

}  // namespace

cplx gamma_k(cplx z, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidParameter, "gamma_k needs k >= 1");
  if (!(z.real() > 0.0)) throw Error(ErrorKind::InvalidParameter, "gamma_k needs Re z > 0");
  if (!(k > z.real())) throw Error(ErrorKind::InvalidParameter, "gamma_k needs k > Re z");
  cplx kz = static_cast<double>(k) - z;
  if (is_nonpositive_integer(kz) || is_nonpositive_integer(z))
    throw Error(ErrorKind::InvalidParameter, "gamma_k pole configuration");
  return std::exp(lgamma_complex(static_cast<double>(k)) - lgamma_complex(z) - lgamma_complex(kz));
}

void QuadratureScheme::validate() const {
  if (!(u_min < 0.0 && u_max > 0.0)) throw Error(ErrorKind::InvalidParameter, "quadrature needs u_min < 0 < u_max");
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidParameter, "quadrature step must be positive");
  if (refine < 1 || refine > 8) throw Error(ErrorKind::InvalidParameter, "refine must lie in [1, 8]");
}

QuadResult quad_halfline(const std::function<cplx(double)>& f, cplx z, const QuadratureScheme& quad) {
  quad.validate();
  if (!(z.real() > 0.0)) throw Error(ErrorKind::InvalidParameter, "quadrature needs Re z > 0");
  auto g = [&](double u) { return std::exp(z * u) * f(std::exp(u)); };
  QuadResult res;

  // bounds: extend each end until the end sample is negligible against the peak
  double lo = quad.u_min, hi = quad.u_max;
  double peak = 0.0;
  for (double u = lo; u <= hi; u += quad.step) peak = std::max(peak, std::abs(g(u)));
  auto settle = [&](double& end, double dir) {
    for (int i = 0;; ++i) {
      double ge = std::abs(g(end));
      if (!std::isfinite(ge)) {
        res.warning = true;
        return;
      }
      double inner = std::abs(g(end - dir * 1.0));
      if (ge <= kTailTol * std::max(peak, 1e-300)) return;
      if (i >= kMaxExtensions || (ge >= inner && i > 5)) {
        res.warning = true;
        return;
      }
      for (double u = end; dir * u <= dir * (end + dir * 10.0); u += dir * quad.step)
        peak = std::max(peak, std::abs(g(u)));
      end += dir * 10.0;
    }
  };
  settle(lo, -1.0);
  settle(hi, 1.0);
  res.u_lo = lo;
  res.u_hi = hi;

  // trapezoid with step halving; nodes of the coarser level are reused
  double h = quad.step;
  long n = static_cast<long>(std::ceil((hi - lo) / h));
  h = (hi - lo) / static_cast<double>(n);
  cplx sum = 0.5 * (g(lo) + g(hi));
  for (long i = 1; i < n; ++i) sum += g(lo + static_cast<double>(i) * h);
  cplx prev = sum * h;
  cplx cur = prev;
  for (int r = 0; r < quad.refine; ++r) {
    for (long i = 0; i < n; ++i) sum += g(lo + (static_cast<double>(i) + 0.5) * h);
    n *= 2;
    h *= 0.5;
    prev = cur;
    cur = sum * h;
  }
  res.value = cur;
  res.error = std::abs(cur - prev);
  return res;
}

PositivizeResult positivize(const SymExpr& a, const std::vector<PhasePoint>& grid) {
  if (grid.empty()) throw Error(ErrorKind::InvalidInput, "positivize needs a non-empty grid");
  CompiledExpr fa(a);
  std::vector<cplx> vals;
  std::vector<double> radius;
  for (const auto& w : grid) {
    vals.push_back(fa(w));
    radius.push_back(w.japanese());
  }
  // sector condition on the far part of the grid (outer quarter by <w>)
  std::vector<double> sorted = radius;
  std::sort(sorted.begin(), sorted.end());
  double far = sorted[(3 * sorted.size()) / 4];
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (radius[i] >= far && vals[i].real() <= 0.0 && std::fabs(vals[i].imag()) <= 1e-14 * std::abs(vals[i]))
      throw Error(ErrorKind::UnsupportedSymbol, "sector condition fails on the far grid");

  double min_re = INFINITY;
  for (auto v : vals) min_re = std::min(min_re, v.real());
  double shift = 0.0;
  if (!(min_re > 0.0)) {
    shift = 1.0;
    while (!(min_re + shift > 0.0)) shift *= 2.0;
  }
  PositivizeResult out{a, shift, 0.0};
  if (shift > 0.0) out.a0 = a + SymExpr::constant(a.registry(), GaussRational(static_cast<long>(shift)));
  for (auto v : vals) {
    double re = v.real() + shift, im = std::fabs(v.imag());
    if (re <= 0.0) out.sector_B = std::max(out.sector_B, im > 0.0 ? -re / im * (1.0 + 1e-12) : INFINITY);
  }
  return out;
}

// ---------------------------------------------------------------- integrand

FormalSeries PowerIntegrand::balakrishnan_series(const SymExpr& a0, int k, int order) {
  if (k < 1) throw Error(ErrorKind::InvalidParameter, "k must be >= 1");
  FormalSeries q = resolvent_parametrix(a0, order);
  FormalSeries qk = sharp_power(q, k, order);
  FormalSeries ak = sharp_power(FormalSeries::symbol(a0), k, order);
  return sharp(ak, qk, order);
}

PowerIntegrand::PowerIntegrand(const SymExpr& a0, int k, int order)
    : PowerIntegrand(a0, k, balakrishnan_series(a0, k, order)) {}

PowerIntegrand::PowerIntegrand(const SymExpr& a0, int k, FormalSeries integrand)
    : a0_(a0), k_(k), series_(std::move(integrand)), a0c_(a0) {
  const RegistryPtr& reg = a0.registry();
  SymExpr al = a0 + SymExpr::variable(reg, reg->var_lambda());
  auto id = reg->find_base_by_poly(al.terms());
  if (!id) throw Error(ErrorKind::InvalidInput, "a0 + lambda is not a registered base");
  lambda_base_ = *id;
  compile();
}

void PowerIntegrand::compile() {
  const RegistryPtr& reg = a0_.registry();
  const int vl = reg->var_lambda();
  std::map<std::pair<int, Exponent>, int> group_id;
  for (const auto& term : series_.terms()) {
    std::map<int, TermMap> by_group;
    for (const auto& [key, c] : term.terms()) {
      if (key.mono.e[reg->var_mu()] != 0 || key.mono.e[reg->var_t()] != 0 || key.exp_flag)
        throw Error(ErrorKind::UnsupportedSymbol, "integrand may depend only on (w, lambda)");
      TermKey rest = key;
      int m = rest.mono.e[vl];
      rest.mono.e[vl] = 0;
      Exponent r(0);
      std::vector<BasePower> kept;
      for (const auto& bp : rest.powers) {
        if (bp.base == lambda_base_) {
          r = -bp.exp;
        } else {
          if (reg->base(bp.base).depends[static_cast<std::size_t>(vl)])
            throw Error(ErrorKind::UnsupportedSymbol, "integrand has a second lambda-dependent base");
          kept.push_back(bp);
        }
      }
      rest.powers = std::move(kept);
      auto gkey = std::make_pair(m, r);
      auto it = group_id.find(gkey);
      if (it == group_id.end()) {
        it = group_id.emplace(gkey, static_cast<int>(groups_.size())).first;
        groups_.push_back({m, r.value()});
      }
      accumulate(by_group[it->second], rest, c);
    }
    std::vector<std::pair<int, CompiledExpr>> entry;
    for (auto& [g, tm] : by_group)
      if (!tm.empty()) entry.emplace_back(g, CompiledExpr(SymExpr(reg, std::move(tm))));
    plan_.push_back(std::move(entry));
  }
}

void PowerIntegrand::group_values(const PhasePoint& w, std::vector<std::vector<cplx>>& out) const {
  out.assign(plan_.size(), std::vector<cplx>(groups_.size(), 0.0));
  PhasePoint p = w;
  p.lambda = 0.0;
  for (std::size_t j = 0; j < plan_.size(); ++j)
    for (const auto& [g, f] : plan_[j]) out[j][static_cast<std::size_t>(g)] += f(p);
}

// ---------------------------------------------------------------- evaluator

PowerEvaluator::PowerEvaluator(std::shared_ptr<const PowerIntegrand> integrand, cplx z, QuadratureScheme quad)
    : integrand_(std::move(integrand)), z_(z), gamma_(gamma_k(z, integrand_->k())), quad_(quad) {
  quad_.validate();
}

const PowerEvaluator::GroupIntegrals& PowerEvaluator::integrals(double A) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(A);
  if (it != cache_.end()) return it->second;

  const auto& groups = integrand_->groups();
  GroupIntegrals gi;
  gi.value.assign(groups.size(), 0.0);
  gi.error.assign(groups.size(), 0.0);
  if (groups.empty()) return cache_.emplace(A, std::move(gi)).first->second;
  if (!(A > 0.0)) throw Error(ErrorKind::DomainViolation, "a0(w) must be positive");

  // decay rates at both ends; the integrand of group g behaves like
  // e^{(Re z + m) u} A^{-r} at -inf and e^{(Re z + m - r) u} at +inf
  const double zr = z_.real();
  double rate_lo = INFINITY, rate_hi = INFINITY;
  for (const auto& g : groups) {
    rate_lo = std::min(rate_lo, zr + g.m);
    rate_hi = std::min(rate_hi, g.r - g.m - zr);
  }
  const double c = std::log(A);
  double lo = quad_.u_min, hi = quad_.u_max;
  if (!(rate_lo > 0.0) || !(rate_hi > 0.0)) {
    gi.warning = true;
  } else {
    auto tail = [&](double dist, double rate) { return std::exp(-rate * dist) / rate; };
    int ext = 0;
    while (tail(std::max(0.0, c - lo), rate_lo) > kTailTol && ext++ < kMaxExtensions) lo -= 10.0;
    if (ext > kMaxExtensions) gi.warning = true;
    ext = 0;
    while (tail(std::max(0.0, hi - c), rate_hi) > kTailTol && ext++ < kMaxExtensions) hi += 10.0;
    if (ext > kMaxExtensions) gi.warning = true;
  }

  const double h_coarse = quad_.step;
  const long n_coarse = static_cast<long>(std::ceil((hi - lo) / h_coarse));
  const long scale = 1L << quad_.refine;
  const long n = n_coarse * scale;
  const double h = (hi - lo) / static_cast<double>(n);
  const std::size_t nodes = static_cast<std::size_t>(n) + 1;

  // weights for the finest and the next coarser trapezoid, times e^{z u}
  std::vector<double> wf_re(nodes), wf_im(nodes), wc_re(nodes, 0.0), wc_im(nodes, 0.0), log_l(nodes), u(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    u[i] = lo + static_cast<double>(i) * h;
    cplx e = std::exp(z_ * u[i]);
    double end = (i == 0 || i + 1 == nodes) ? 0.5 : 1.0;
    wf_re[i] = h * end * e.real();
    wf_im[i] = h * end * e.imag();
    if (i % 2 == 0) {
      wc_re[i] = 2.0 * wf_re[i];
      wc_im[i] = 2.0 * wf_im[i];
    }
    // ln(A + e^u) without overflow
    log_l[i] = u[i] > c ? u[i] + std::log1p(std::exp(c - u[i])) : c + std::log1p(std::exp(u[i] - c));
  }
  const auto& kern = kernels::active();
  std::vector<double> t(nodes);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t i = 0; i < nodes; ++i) t[i] = std::exp(groups[g].m * u[i] - groups[g].r * log_l[i]);
    double fr, fi, cr, ci;
    kern.dot2(t.data(), wf_re.data(), wf_im.data(), nodes, &fr, &fi);
    kern.dot2(t.data(), wc_re.data(), wc_im.data(), nodes, &cr, &ci);
    gi.value[g] = {fr, fi};
    gi.error[g] = std::abs(cplx(fr - cr, fi - ci));
  }
  return cache_.emplace(A, std::move(gi)).first->second;
}

std::vector<QuadResult> PowerEvaluator::coefficients(const PhasePoint& w) const {
  const double A = integrand_->a0_value(w);
  const GroupIntegrals& gi = integrals(A);
  std::vector<std::vector<cplx>> V;
  integrand_->group_values(w, V);
  std::vector<QuadResult> out(V.size());
  for (std::size_t j = 0; j < V.size(); ++j) {
    cplx s = 0.0;
    double err = 0.0;
    for (std::size_t g = 0; g < V[j].size(); ++g) {
      if (V[j][g] == 0.0) continue;
      s += V[j][g] * gi.value[g];
      err += std::abs(V[j][g]) * gi.error[g];
    }
    out[j].value = gamma_ * s;
    out[j].error = std::abs(gamma_) * err;
    out[j].warning = gi.warning;
  }
  return out;
}

QuadResult PowerEvaluator::coefficient(int j, const PhasePoint& w) const {
  if (j < 0 || j >= order()) throw Error(ErrorKind::InvalidParameter, "coefficient index outside the precomputed order");
  return coefficients(w)[static_cast<std::size_t>(j)];
}

cplx power_series_eval(const PowerEvaluator& ev, int n, const PhasePoint& w, const CutoffConfig& cfg) {
  if (n < 1 || n > ev.order()) throw Error(ErrorKind::InvalidParameter, "order outside the precomputed range");
  auto c = ev.coefficients(w);
  std::vector<cplx> vals;
  for (int j = 0; j < n; ++j) vals.push_back(c[static_cast<std::size_t>(j)].value);
  return resum_values(vals, cfg, w, ResumStrategy::Cutoff);
}

// ---------------------------------------------------------------- two-variable identity

TwoVarResult two_var_identity_check(const std::function<cplx(double)>& f, const std::function<cplx(double)>& df,
                                    cplx z, cplx zeta, const QuadratureScheme& quad2d) {
  quad2d.validate();
  if (!(z.real() > 0.0 && z.real() < 1.0 && zeta.real() > 0.0 && zeta.real() < 1.0))
    throw Error(ErrorKind::InvalidParameter, "two-variable identity needs 0 < Re z, Re zeta < 1");
  TwoVarResult out;

  auto divided = [&](double l, double m) -> cplx {
    if (std::fabs(l - m) <= 1e-7 * std::max(l, m)) return df(0.5 * (l + m));
    return (f(l) - f(m)) / (l - m);
  };
  // bounds from one-dimensional slices through lambda = mu = 1
  auto slice_bounds = [&](cplx s, bool first) {
    std::function<cplx(double)> slice = [&](double v) { return first ? divided(v, 1.0) : divided(1.0, v); };
    QuadResult probe = quad_halfline(slice, s, {quad2d.u_min, quad2d.u_max, 0.5, 1});
    out.warning = out.warning || probe.warning;
    return std::make_pair(probe.u_lo, probe.u_hi);
  };
  auto [ulo, uhi] = slice_bounds(z, true);
  auto [vlo, vhi] = slice_bounds(zeta, false);

  auto level = [&](double h) {
    long nu = static_cast<long>(std::ceil((uhi - ulo) / h)), nv = static_cast<long>(std::ceil((vhi - vlo) / h));
    double hu = (uhi - ulo) / static_cast<double>(nu), hv = (vhi - vlo) / static_cast<double>(nv);
    std::vector<double> lam(static_cast<std::size_t>(nu) + 1), mu(static_cast<std::size_t>(nv) + 1);
    std::vector<cplx> fl(lam.size()), fm(mu.size()), wu(lam.size()), wv(mu.size());
    for (std::size_t i = 0; i < lam.size(); ++i) {
      double uu = ulo + static_cast<double>(i) * hu;
      lam[i] = std::exp(uu);
      fl[i] = f(lam[i]);
      wu[i] = hu * ((i == 0 || i + 1 == lam.size()) ? 0.5 : 1.0) * std::exp(z * uu);
    }
    for (std::size_t j = 0; j < mu.size(); ++j) {
      double vv = vlo + static_cast<double>(j) * hv;
      mu[j] = std::exp(vv);
      fm[j] = f(mu[j]);
      wv[j] = hv * ((j == 0 || j + 1 == mu.size()) ? 0.5 : 1.0) * std::exp(zeta * vv);
    }
    cplx total = 0.0;
    for (std::size_t i = 0; i < lam.size(); ++i) {
      cplx row = 0.0;
      for (std::size_t j = 0; j < mu.size(); ++j) {
        double d = lam[i] - mu[j];
        cplx ft = std::fabs(d) <= 1e-7 * std::max(lam[i], mu[j]) ? df(0.5 * (lam[i] + mu[j])) : (fl[i] - fm[j]) / d;
        row += wv[j] * ft;
      }
      total += wu[i] * row;
    }
    return total;
  };
  cplx fine = level(quad2d.step / static_cast<double>(1L << (quad2d.refine - 1)));
  cplx coarse = level(quad2d.step / static_cast<double>(1L << (quad2d.refine - 1)) * 2.0);
  cplx g1 = gamma_k(z, 1) * gamma_k(zeta, 1);
  out.lhs = g1 * fine;
  out.lhs_error = std::abs(g1 * (fine - coarse));

  QuadResult r = quad_halfline(df, z + zeta, {-40.0, 40.0, 0.05, 2});
  cplx g2 = gamma_k(z + zeta, 2);
  out.rhs = g2 * r.value;
  out.rhs_error = std::abs(g2) * r.error;
  out.warning = out.warning || r.warning;
  return out;
}

}  // namespace weyl
