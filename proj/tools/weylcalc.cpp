// weylcalc: command-line front end for the weyl library.
//
// Every command writes into --out-dir; payload files depend only on the
// configuration (flags or --config file), metadata.json holds the rest.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "output.hpp"
#include "weyl/cpow.hpp"
#include "weyl/heat.hpp"
#include "weyl/parametrix.hpp"
#include "weyl/quant.hpp"
#include "weyl/series_io.hpp"
#include "weyl/weights.hpp"

using namespace weyl;
using nlohmann::json;
using weylcalc::CsvWriter;
using weylcalc::Output;

namespace {

struct Common {
  std::string out_dir = "weylcalc-out";
  std::uint64_t seed = 1;
};

struct GridOpts {
  std::string points;
  int count = 24;
  double radius = 5.0;

  void add(CLI::App* sub) {
    sub->add_option("--points", points, "CSV of phase-space points (x.., xi..)")->check(CLI::ExistingFile);
    sub->add_option("--count", count, "random points when --points is absent")->check(CLI::Range(1, 100000));
    sub->add_option("--radius", radius, "half-width of the random box")->check(CLI::PositiveNumber);
  }
  std::vector<PhasePoint> make(const Common& c, int dim) const {
    if (!points.empty()) return weylcalc::read_points(points, dim);
    return weylcalc::random_points(c.seed, count, radius, dim);
  }
};

json witness(const std::optional<IndexPair>& w) {
  if (!w) return nullptr;
  return json::array({w->first, w->second});
}

json condition_json(const ConditionReport& r) {
  return {{"M1", {{"holds", r.holds_M1}, {"witness", witness(r.witness_M1)}}},
          {"M2", {{"holds", r.holds_M2}, {"witness", witness(r.witness_M2)}}},
          {"M3", {{"holds", r.holds_M3}, {"witness", witness(r.witness_M3)}}},
          {"M3prime", {{"holds", r.holds_M3prime}, {"witness", witness(r.witness_M3prime)}}},
          {"M4", {{"holds", r.holds_M4}, {"witness", witness(r.witness_M4)}}},
          {"fitted_c0", r.fitted_c0},
          {"fitted_H", r.fitted_H},
          {"truncation_index", r.truncation_index}};
}

json violation_json(const std::optional<LemmaViolation>& v) {
  if (!v) return {{"holds", true}};
  return {{"holds", false}, {"indices", v->indices}, {"lhs_log", v->lhs_log}, {"rhs_log", v->rhs_log}};
}

json cplx_json(cplx v) { return json::array({v.real(), v.imag()}); }

cplx parse_z(const std::string& s) {
  std::istringstream in(s);
  double re = 0.0, im = 0.0;
  char comma = 0;
  if (!(in >> re)) throw Error(ErrorKind::InvalidParameter, "z must be RE or RE,IM");
  if (in >> comma) {
    if (comma != ',' || !(in >> im)) throw Error(ErrorKind::InvalidParameter, "z must be RE or RE,IM");
  }
  return {re, im};
}

SymExpr require_symbol(const SymbolFile& f, const std::string& path) {
  if (!f.symbol) throw Error(ErrorKind::InvalidInput, path + ": no 'symbol =' line");
  return *f.symbol;
}

// The polynomial behind `symbol`: either a polynomial already or a single base to the first power.
std::optional<SymExpr> polynomial_form(const SymExpr& s) {
  if (s.is_polynomial()) return s;
  if (s.size() == 1) {
    const auto& [key, c] = *s.terms().begin();
    bool bare = key.mono == Monomial{} && !key.exp_flag && key.powers.size() == 1 && key.powers[0].exp == Exponent(1) &&
                c == GaussRational(1);
    if (bare) return SymExpr(s.registry(), s.registry()->base(key.powers[0].base).poly);
  }
  return {};
}

SymExpr as_polynomial(const SymExpr& s) {
  if (auto p = polynomial_form(s)) return *p;
  throw Error(ErrorKind::UnsupportedSymbol, "complex powers need a polynomial symbol (or a single registered base)");
}

std::vector<PhasePoint> box_grid(int dim, double half, int steps) {
  std::vector<PhasePoint> out;
  const int n = 2 * dim;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (;;) {
    PhasePoint p;
    for (int i = 0; i < dim; ++i) {
      p.x.push_back(-half + 2.0 * half * idx[static_cast<std::size_t>(i)] / steps);
      p.xi.push_back(-half + 2.0 * half * idx[static_cast<std::size_t>(dim + i)] / steps);
    }
    out.push_back(p);
    int k = 0;
    while (k < n && ++idx[static_cast<std::size_t>(k)] > steps) idx[static_cast<std::size_t>(k++)] = 0;
    if (k == n) break;
  }
  return out;
}

struct Positive {
  SymExpr a0;
  double shift = 0.0;
  double sector_B = 0.0;
};

// positivizes on the box and the extra points, then registers a0 with its resolvent bases
Positive prepare_power_base(const std::shared_ptr<Registry>& reg, const SymExpr& symbol,
                            const std::vector<PhasePoint>& extra) {
  SymExpr poly = as_polynomial(symbol);
  auto grid = box_grid(reg->dim(), 6.0, reg->dim() == 1 ? 12 : 4);
  grid.insert(grid.end(), extra.begin(), extra.end());
  auto pos = positivize(poly, grid);
  reg->intern_base("a0", pos.a0);
  register_resolvent_bases(*reg, pos.a0, "a0");
  return {pos.a0, pos.shift, pos.sector_B};
}

std::string alpha_text(const std::vector<int>& alpha) {
  std::string s;
  for (int v : alpha) s += (s.empty() ? "" : " ") + std::to_string(v);
  return s;
}

// ---------------------------------------------------------------- commands

struct CheckWeights {
  double gevrey = 2.0;
  std::string weights;
  int pmax = kDefaultPMax;
  int lemma_order = 30;

  void add(CLI::App* sub) {
    sub->add_option("--gevrey", gevrey, "M_p = p!^sigma")->check(CLI::PositiveNumber);
    sub->add_option("--weights", weights, "two-column file p ln(M_p)")->check(CLI::ExistingFile);
    sub->add_option("--pmax", pmax, "tabulated range for --gevrey")->check(CLI::Range(2, 100000));
    sub->add_option("--lemma-order", lemma_order, "largest order for the sequence lemmas")->check(CLI::Range(2, 200));
  }

  void run(const Common&, Output& out) const {
    WeightSequence ws = weights.empty() ? make_gevrey(gevrey, pmax) : load_weight_sequence(weights);
    json rep;
    rep["sequence"] = {{"source", weights.empty() ? "gevrey" : "file"}, {"p_max", ws.p_max()}};
    if (ws.sigma()) rep["sequence"]["sigma"] = *ws.sigma();
    rep["conditions"] = condition_json(check_conditions(ws));
    const int lo = std::min(lemma_order, ws.p_max());
    rep["lemmas"] = {{"binomial", violation_json(check_binomial_lemma(ws, lo))},
                     {"product", violation_json(check_product_lemma(ws, std::min(lo, 12)))}};
    out.write_report("report.json", rep);

    CsvWriter seq(out.open("sequence.csv"), {"p", "ln_M", "m"});
    for (int p = 0; p <= ws.p_max(); ++p) {
      seq << p << ws.log_M(p) << ws.m(p);
      seq.end_row();
    }
    CsvWriter assoc(out.open("associated.csv"), {"rho", "M", "argmax", "boundary_hit"});
    for (int e = 0; e <= 16; ++e) {
      double rho = std::pow(10.0, 0.5 * e);
      auto v = associated_function(ws, rho);
      assoc << rho << v.value << v.argmax << static_cast<long>(v.boundary_hit);
      assoc.end_row();
    }
  }
};

json series_summary(const FormalSeries& s) {
  json terms = json::array();
  for (const auto& t : s.terms()) terms.push_back({{"size", t.size()}, {"zero", t.vanishes_identically()}});
  return {{"order", s.order()}, {"closed", s.closed()}, {"dim", s.dim()}, {"terms", terms}};
}

struct Sharp {
  std::string a, b, out_name = "product.series";
  int order = 4;

  void add(CLI::App* sub) {
    sub->add_option("--a", a, "left series file")->required()->check(CLI::ExistingFile);
    sub->add_option("--b", b, "right series file")->required()->check(CLI::ExistingFile);
    sub->add_option("--order", order, "number of terms")->check(CLI::Range(1, 12));
    sub->add_option("--out", out_name, "product series file (inside --out-dir)");
  }

  void run(const Common&, Output& out) const {
    auto fa = load_series(a);
    auto fb = load_series(b, fa.registry);
    if (order > fa.series.available() || order > fb.series.available())
      throw Error(ErrorKind::InvalidParameter, "order exceeds the terms known in an input series");
    FormalSeries c = sharp(fa.series, fb.series, order);
    save_series(c, out.path(out_name));
    out.note(out_name);
    out.write_report("report.json", {{"product", series_summary(c)}});
  }
};

struct Requantize {
  std::string series, tau = "1/2", tau1 = "0", out_name = "requantized.series";
  int order = 4;

  void add(CLI::App* sub) {
    sub->add_option("--series", series, "input series file")->required()->check(CLI::ExistingFile);
    sub->add_option("--tau", tau, "source quantization (rational, 1/2 = Weyl)");
    sub->add_option("--tau1", tau1, "target quantization (rational)");
    sub->add_option("--order", order, "number of terms")->check(CLI::Range(1, 12));
    sub->add_option("--out", out_name, "output series file (inside --out-dir)");
  }

  void run(const Common&, Output& out) const {
    auto f = load_series(series);
    if (order > f.series.available()) throw Error(ErrorKind::InvalidParameter, "order exceeds the terms known in the series");
    FormalSeries p = change_quantization(f.series, parse_rational(tau), parse_rational(tau1), order);
    save_series(p, out.path(out_name));
    out.note(out_name);
    out.write_report("report.json", {{"tau", tau}, {"tau1", tau1}, {"series", series_summary(p)}});
  }
};

struct Parametrix {
  std::string symbol, side = "left", out_name = "parametrix.series";
  int order = 4;
  int profile_order = 0;
  double gevrey = 1.0;
  double rho = 1.0;
  GridOpts grid;

  void add(CLI::App* sub) {
    sub->add_option("--symbol", symbol, "symbol file")->required()->check(CLI::ExistingFile);
    sub->add_option("--order", order, "number of terms")->check(CLI::Range(1, 10));
    sub->add_option("--side", side, "left (q#a = 1) or right (a#q = 1)")->check(CLI::IsMember({"left", "right"}));
    sub->add_option("--out", out_name, "output series file (inside --out-dir)");
    sub->add_option("--profile-order", profile_order, "derivative order of the hypoellipticity profile (0 = off)")
        ->check(CLI::Range(0, 8));
    sub->add_option("--gevrey", gevrey, "A_p = p!^sigma for the profile")->check(CLI::PositiveNumber);
    sub->add_option("--rho", rho, "symbol-class rho for the profile")->check(CLI::Range(0.0, 1.0));
    grid.add(sub);
  }

  void run(const Common& c, Output& out) const {
    auto f = load_symbol_file(symbol);
    SymExpr a = require_symbol(f, symbol);
    FormalSeries q = side == "left" ? weyl::parametrix(a, order) : right_parametrix(a, order);
    save_series(q, out.path(out_name));
    out.note(out_name);
    FormalSeries id = side == "left" ? verify_left_identity(q, a, order) : verify_right_identity(q, a, order);
    json check = json::array();
    for (const auto& t : id.terms()) check.push_back(t.vanishes_identically());
    json rep = {{"side", side}, {"parametrix", series_summary(q)}, {"identity_terms_vanish", check}};
    if (profile_order > 0) {
      auto pts = grid.make(c, f.registry->dim());
      auto prof = hypoellipticity_profile(a, make_gevrey(gevrey, 40), rho, pts, profile_order);
      rep["profile"] = {{"rho", prof.rho},
                        {"max_order", prof.max_order},
                        {"fitted_h", prof.fitted_h},
                        {"fitted_C", prof.fitted_C},
                        {"lower_bound_ok", prof.lower_bound_ok},
                        {"lower_bound_c", prof.lower_bound_c}};
      auto header = weylcalc::point_header(f.registry->dim());
      header.insert(header.begin(), "alpha");
      header.push_back("ratio");
      CsvWriter w(out.open("profile.csv"), header);
      for (const auto& row : prof.ratio_table) {
        w << alpha_text(row.alpha);
        weylcalc::append_point(w, prof.grid[static_cast<std::size_t>(row.point)]);
        w << row.ratio;
        w.end_row();
      }
    }
    out.write_report("report.json", rep);
  }
};

struct ComplexPower {
  std::string symbol, z_text = "0.5";
  int order = 4;
  int k = 0;
  double cutoff_R = 4.0;
  double gevrey = 2.0;
  GridOpts grid;

  void add(CLI::App* sub) {
    sub->add_option("--symbol", symbol, "symbol file (polynomial or a single base)")->required()->check(CLI::ExistingFile);
    sub->add_option("--z", z_text, "exponent RE or RE,IM");
    sub->add_option("--order", order, "number of coefficients p_{z,j}")->check(CLI::Range(1, 6));
    sub->add_option("--k", k, "Balakrishnan k (0 = floor(Re z) + 1)")->check(CLI::Range(0, 12));
    sub->add_option("--cutoff-R", cutoff_R, "cutoff scale R for the resummed column")->check(CLI::PositiveNumber);
    sub->add_option("--gevrey", gevrey, "M_p = p!^sigma for the cutoff")->check(CLI::PositiveNumber);
    grid.add(sub);
  }

  void run(const Common& c, Output& out) const {
    const cplx z = parse_z(z_text);
    auto f = load_symbol_file(symbol);
    SymExpr a = require_symbol(f, symbol);
    auto pts = grid.make(c, f.registry->dim());
    Positive pos = prepare_power_base(f.registry, a, pts);
    const int kk = k > 0 ? k : static_cast<int>(std::floor(z.real())) + 1;
    PowerEvaluator ev(std::make_shared<PowerIntegrand>(pos.a0, kk, order), z);
    auto cfg = CutoffConfig::from_weights(make_gevrey(gevrey, 40), cutoff_R);

    auto header = weylcalc::point_header(f.registry->dim());
    header.insert(header.end(), {"j", "re", "im", "err", "warning"});
    CsvWriter w(out.open("coefficients.csv"), header);
    auto rheader = weylcalc::point_header(f.registry->dim());
    rheader.insert(rheader.end(), {"N", "re", "im"});
    CsvWriter r(out.open("resummed.csv"), rheader);
    double max_err = 0.0;
    long warnings = 0;
    for (const auto& p : pts) {
      auto cs = ev.coefficients(p);
      for (int j = 0; j < order; ++j) {
        const auto& q = cs[static_cast<std::size_t>(j)];
        weylcalc::append_point(w, p);
        w << j << q.value.real() << q.value.imag() << q.error << static_cast<long>(q.warning);
        w.end_row();
        max_err = std::max(max_err, q.error);
        warnings += q.warning;
      }
      for (int N = 1; N <= order; ++N) {
        cplx v = power_series_eval(ev, N, p, cfg);
        weylcalc::append_point(r, p);
        r << N << v.real() << v.imag();
        r.end_row();
      }
    }
    out.write_report("report.json", {{"z", cplx_json(z)},
                                     {"k", kk},
                                     {"order", order},
                                     {"points", pts.size()},
                                     {"shift", pos.shift},
                                     {"sector_B", pos.sector_B},
                                     {"gamma_k", cplx_json(gamma_k(z, kk))},
                                     {"max_quadrature_error", max_err},
                                     {"quadrature_warnings", warnings}});
  }
};

struct Heat {
  std::string symbol, out_name = "heat.csv";
  int order = 3;
  std::vector<double> t_grid{0.0, 0.5, 1.0, 2.0};
  double cutoff_R = 4.0;
  double gevrey = 2.0;
  GridOpts grid;

  void add(CLI::App* sub) {
    sub->add_option("--symbol", symbol, "symbol file; the symbol is b in exp(-t b)")->required()->check(CLI::ExistingFile);
    sub->add_option("--order", order, "number of terms u_j")->check(CLI::Range(1, 8));
    sub->add_option("--t-grid", t_grid, "comma-separated times")->delimiter(',')->check(CLI::NonNegativeNumber);
    sub->add_option("--out", out_name, "per-term CSV (inside --out-dir)");
    sub->add_option("--cutoff-R", cutoff_R, "cutoff scale R for the resummed column")->check(CLI::PositiveNumber);
    sub->add_option("--gevrey", gevrey, "M_p = p!^sigma for the cutoff")->check(CLI::PositiveNumber);
    grid.add(sub);
  }

  void run(const Common& c, Output& out) const {
    auto f = load_symbol_file(symbol);
    SymExpr b = require_symbol(f, symbol);
    if (!f.registry->has_exp_symbol()) f.registry->set_exp_symbol(b);
    auto terms = heat_terms(b, order);
    auto pts = grid.make(c, f.registry->dim());
    auto cfg = CutoffConfig::from_weights(make_gevrey(gevrey, 40), cutoff_R);

    auto header = weylcalc::point_header(f.registry->dim());
    header.insert(header.begin(), "t");
    auto rheader = header;
    header.insert(header.end(), {"j", "re", "im"});
    rheader.insert(rheader.end(), {"re", "im"});
    CsvWriter w(out.open(out_name), header);
    CsvWriter r(out.open("resummed.csv"), rheader);
    std::vector<CompiledExpr> compiled;
    for (const auto& t : terms) compiled.emplace_back(t.u);
    for (double t : t_grid)
      for (auto p : pts) {
        p.t = t;
        for (int j = 0; j < order; ++j) {
          cplx v = compiled[static_cast<std::size_t>(j)](p);
          w << t;
          weylcalc::append_point(w, p);
          w << j << v.real() << v.imag();
          w.end_row();
        }
        cplx s = heat_evaluate(terms, t, p, cfg);
        r << t;
        weylcalc::append_point(r, p);
        r << s.real() << s.imag();
        r.end_row();
      }
    json residual = json::array(), initial = json::array(), Q = json::array();
    const int vt = f.registry->var_t();
    for (int j = 0; j < order; ++j) {
      residual.push_back(pde_residual(terms, j).vanishes_identically());
      SymExpr q0 = terms[static_cast<std::size_t>(j)].Q.set_zero(vt);
      initial.push_back(j == 0 ? (q0 - SymExpr::constant(f.registry, 1)).vanishes_identically() : q0.vanishes_identically());
      Q.push_back(terms[static_cast<std::size_t>(j)].Q.to_infix());
    }
    out.write_report("report.json",
                     {{"order", order}, {"t_grid", t_grid}, {"residual_vanishes", residual}, {"initial_condition_ok", initial}, {"Q", Q}});
  }
};

struct Quantize {
  std::string symbol, method = "auto", out_name = "matrix.bin";
  int basis = 64;
  int pad = 0;
  WignerQuadrature quad;
  bool csv = false;

  void add(CLI::App* sub) {
    sub->add_option("--symbol", symbol, "symbol file (d = 1)")->required()->check(CLI::ExistingFile);
    sub->add_option("--basis", basis, "Hermite basis size")->check(CLI::Range(1, 2048));
    sub->add_option("--method", method, "poly, wigner or auto")->check(CLI::IsMember({"auto", "poly", "wigner"}));
    sub->add_option("--pad", pad, "padded dimension for poly (0 = minimum)")->check(CLI::NonNegativeNumber);
    sub->add_option("--nodes", quad.nodes_per_state, "quadrature nodes per basis state")->check(CLI::Range(1, 64));
    sub->add_option("--margin", quad.window_margin, "quadrature window margin")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_name, "binary matrix file (inside --out-dir)");
    sub->add_flag("--csv", csv, "also write matrix.csv");
  }

  void run(const Common&, Output& out) const {
    auto f = load_symbol_file(symbol);
    SymExpr s = require_symbol(f, symbol);
    auto p = polynomial_form(s);
    const bool poly = method == "poly" || (method == "auto" && p);
    HermiteOperator op = poly ? quantize_poly(p ? *p : s, basis, pad) : quantize_general(s, basis, quad);
    write_matrix_binary(op, out.path(out_name));
    out.note(out_name);
    if (csv) {
      write_matrix_csv(op, out.path("matrix.csv"));
      out.note("matrix.csv");
    }
    out.write_report("report.json", {{"method", poly ? "poly" : "wigner"},
                                     {"n_basis", op.n_basis()},
                                     {"n_pad", op.n_pad},
                                     {"hermitian", op.hermitian_flag},
                                     {"accuracy_warning", op.accuracy_warning}});
  }
};

json spectral_json(const SpectralReport& r) {
  return {{"compared_states", {r.first, r.last}},
          {"state_error", r.state_error},
          {"block_norm", r.block_norm},
          {"max_error", r.max_error},
          {"median_error", r.median_error}};
}

struct SpectralCompare {
  std::string a, b;
  int first = 0;
  int last = -1;

  void add(CLI::App* sub) {
    sub->add_option("--a", a, "reference matrix file")->required()->check(CLI::ExistingFile);
    sub->add_option("--b", b, "compared matrix file")->required()->check(CLI::ExistingFile);
    sub->add_option("--first", first, "first compared state")->check(CLI::NonNegativeNumber);
    sub->add_option("--last", last, "last compared state, inclusive (-1 = n - 1)");
  }

  void run(const Common&, Output& out) const {
    auto A = read_matrix_binary(a), B = read_matrix_binary(b);
    auto rep = spectral_compare(A, B, first, last < 0 ? A.n_basis() - 1 : last);
    out.write_report("report.json", {{"spectral", spectral_json(rep)}});
    CsvWriter w(out.open("states.csv"), {"state", "rel_error"});
    for (std::size_t i = 0; i < rep.state_error.size(); ++i) {
      w << rep.first + static_cast<int>(i) << rep.state_error[i];
      w.end_row();
    }
  }
};

// Op(sum_{j<N} (1 - chi_j) p_{z,j}) against a^z by functional calculus, N = 1..order.
struct ValidatePower {
  std::string symbol;
  std::string z_text = "0.5";
  int basis = 64;
  int order = 3;
  int first = 16;
  int last = 40;
  double sigma = 2.0;
  double cutoff_R = 0.7;
  WignerQuadrature quad;

  void add(CLI::App* sub, bool z_required) {
    sub->add_option("--symbol", symbol, "symbol file, d = 1 (default 1 + x^2 + xi^2)")->check(CLI::ExistingFile);
    auto* zo = sub->add_option("--z", z_text, "exponent RE or RE,IM");
    if (z_required) zo->required();
    sub->add_option("--basis", basis, "Hermite basis size")->check(CLI::Range(8, 1024));
    sub->add_option("--order", order, "largest N")->check(CLI::Range(1, 6));
    sub->add_option("--first", first, "first compared state")->check(CLI::NonNegativeNumber);
    sub->add_option("--last", last, "last compared state, inclusive")->check(CLI::NonNegativeNumber);
    sub->add_option("--gevrey", sigma, "M_p = p!^sigma for the cutoff")->check(CLI::PositiveNumber);
    sub->add_option("--cutoff-R", cutoff_R, "cutoff scale R")->check(CLI::PositiveNumber);
    sub->add_option("--nodes", quad.nodes_per_state, "quadrature nodes per basis state")->check(CLI::Range(1, 64));
    sub->add_option("--margin", quad.window_margin, "quadrature window margin")->check(CLI::PositiveNumber);
  }

  void run(const Common&, Output& out) const {
    const cplx z = parse_z(z_text);
    if (last >= basis || first > last) throw Error(ErrorKind::InvalidParameter, "need first <= last < basis");
    std::shared_ptr<Registry> reg;
    SymExpr a(nullptr);
    if (symbol.empty()) {
      reg = Registry::create(1);
      a = parse_expr(reg, "1 + x^2 + xi^2");
    } else {
      auto f = load_symbol_file(symbol);
      reg = f.registry;
      a = require_symbol(f, symbol);
    }
    if (reg->dim() != 1) throw Error(ErrorKind::UnsupportedOperation, "spectral validation needs d = 1");
    Positive pos = prepare_power_base(reg, a, {});

    // the oscillator has eigenvalues 2n + 1 in this basis
    auto osc = quantize_poly(parse_expr(Registry::create(1), "x^2 + xi^2"), basis);
    double pin = 0.0;
    for (int n = 0; n < basis; ++n)
      for (int m = 0; m < basis; ++m) pin = std::max(pin, std::abs(osc.matrix(n, m) - (n == m ? cplx(2.0 * n + 1) : cplx(0.0))));

    auto H = quantize_poly(pos.a0, basis);
    auto ref = matrix_function(H, [&](double v) { return std::pow(cplx(v), z); });
    const int kk = static_cast<int>(std::floor(z.real())) + 1;
    auto bal = balakrishnan_matrix(H, z, kk);
    double bal_err = 0.0;
    for (int n = 0; n < std::max(1, basis - 4); ++n)
      bal_err = std::max(bal_err, (bal.matrix.col(n) - ref.matrix.col(n)).norm() / ref.matrix.col(n).norm());

    PowerEvaluator ev(std::make_shared<PowerIntegrand>(pos.a0, kk, order), z);
    auto cfg = CutoffConfig::from_weights(make_gevrey(sigma, 20), cutoff_R);
    json per_n = json::array();
    std::vector<SpectralReport> reps;
    CsvWriter w(out.open("states.csv"), {"N", "state", "rel_error"});
    for (int N = 1; N <= order; ++N) {
      auto B = quantize_general([&](double x, double xi) { return power_series_eval(ev, N, PhasePoint::at(x, xi), cfg); },
                                basis, quad);
      auto rep = spectral_compare(ref, B, first, last);
      for (std::size_t i = 0; i < rep.state_error.size(); ++i) {
        w << N << rep.first + static_cast<int>(i) << rep.state_error[i];
        w.end_row();
      }
      json j = spectral_json(rep);
      j["N"] = N;
      j["accuracy_warning"] = B.accuracy_warning;
      per_n.push_back(j);
      reps.push_back(std::move(rep));
    }
    long mono = 0;
    const std::size_t states = reps[0].state_error.size();
    for (std::size_t i = 0; i < states; ++i) {
      bool ok = true;
      for (std::size_t N = 1; N < reps.size(); ++N) ok = ok && reps[N].state_error[i] <= reps[N - 1].state_error[i];
      mono += ok;
    }
    out.write_report("report.json", {{"z", cplx_json(z)},
                                     {"k", kk},
                                     {"basis", basis},
                                     {"shift", pos.shift},
                                     {"cutoff", {{"gevrey", sigma}, {"R", cutoff_R}}},
                                     {"convention_pin_deviation", pin},
                                     {"balakrishnan_matrix_error", bal_err},
                                     {"by_order", per_n},
                                     {"states_non_increasing", mono},
                                     {"states_compared", states}});
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic and numerical Weyl calculus for ultradifferentiable symbols", "weylcalc"};
  app.set_version_flag("--version", weylcalc::kVersion);
  app.set_config("--config", "", "TOML experiment file (sections per subcommand)");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--out-dir", common.out_dir, "output directory");
  app.add_option("--seed", common.seed, "seed for random point grids");

  CheckWeights cw;
  Sharp sh;
  Requantize rq;
  Parametrix pm;
  ComplexPower cp;
  Heat ht;
  Quantize qz;
  SpectralCompare sc;
  ValidatePower vp, vs;

  std::vector<std::pair<CLI::App*, std::function<void(Output&)>>> commands;
  auto reg = [&](const std::string& name, const std::string& help, auto& cmd, auto&& add) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->configurable();
    add(sub);
    commands.emplace_back(sub, [&cmd, &common](Output& o) { cmd.run(common, o); });
    return sub;
  };
  reg("check-weights", "weight-sequence conditions and associated function", cw, [&](CLI::App* s) { cw.add(s); });
  reg("sharp", "sharp product of two series files", sh, [&](CLI::App* s) { sh.add(s); });
  reg("requantize", "change of quantization tau -> tau1", rq, [&](CLI::App* s) { rq.add(s); });
  reg("parametrix", "parametrix series and hypoellipticity profile", pm, [&](CLI::App* s) { pm.add(s); });
  reg("complex-power", "coefficients p_{z,j} of a^z", cp, [&](CLI::App* s) { cp.add(s); })->alias("cpow");
  reg("heat", "heat parametrix terms u_j", ht, [&](CLI::App* s) { ht.add(s); });
  reg("quantize", "Hermite-basis matrix of a symbol", qz, [&](CLI::App* s) { qz.add(s); });
  reg("spectral-compare", "per-state comparison of two matrix files", sc, [&](CLI::App* s) { sc.add(s); });
  reg("validate-power", "quantized power series against the functional calculus", vp, [&](CLI::App* s) { vp.add(s, true); });
  reg("validate-sqrt", "validate-power at z = 1/2 by default", vs, [&](CLI::App* s) { vs.add(s, false); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  for (auto& [sub, fn] : commands) {
    if (!sub->parsed()) continue;
    try {
      // unset paths are left out so the echo can be fed back through --config
      std::string config = "seed=" + std::to_string(common.seed) + "\n[" + sub->get_name() + "]\n";
      std::istringstream echo(sub->config_to_str(true, false));
      for (std::string line; std::getline(echo, line);)
        if (line.size() < 3 || line.compare(line.size() - 3, 3, "=\"\"") != 0) config += line + '\n';
      Output out(common.out_dir, sub->get_name(), config);
      fn(out);
      out.finish(argc, argv);
    } catch (const Error& e) {
      json diag = {{"command", sub->get_name()}, {"error", to_string(e.kind())}, {"message", e.message()}};
      std::cerr << diag.dump() << '\n';
      return 2;
    } catch (const std::exception& e) {
      json diag = {{"command", sub->get_name()}, {"error", "internal"}, {"message", e.what()}};
      std::cerr << diag.dump() << '\n';
      return 3;
    }
  }
  return 0;
}
