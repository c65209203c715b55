#include "weyl/series_io.hpp"

#include <fstream>
#include <sstream>

namespace weyl {

namespace {

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int parse_dim(const std::string& rest) {
  int d = 0;
  try {
    d = std::stoi(rest);
  } catch (const std::exception&) {
    d = 0;
  }
  if (d < 1 || d > kMaxDim)
    throw Error(ErrorKind::InvalidInput, "dim must be in 1.." + std::to_string(kMaxDim));
  return d;
}

}  // namespace

SymbolFile parse_symbol_file(const std::string& text) {
  SymbolFile out;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  auto need_reg = [&] {
    if (!out.registry) out.registry = Registry::create(1);
    return out.registry;
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    std::string rest = trim(line.substr(kw.size()));
    try {
      if (kw == "dim") {
        if (out.registry) throw Error(ErrorKind::InvalidInput, "dim must come first");
        out.registry = Registry::create(parse_dim(rest));
      } else if (kw == "base") {
        auto eq = rest.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::InvalidInput, "expected 'base <name> = <polynomial>'");
        auto reg = need_reg();
        reg->add_base(trim(rest.substr(0, eq)), parse_expr(reg, rest.substr(eq + 1)));
      } else if (kw == "exp" || kw == "symbol") {
        if (rest.empty() || rest[0] != '=') throw Error(ErrorKind::InvalidInput, "expected '" + kw + " = <expr>'");
        auto reg = need_reg();
        SymExpr e = parse_expr(reg, rest.substr(1));
        if (kw == "exp")
          reg->set_exp_symbol(e);
        else
          out.symbol = e;
      } else {
        throw Error(ErrorKind::InvalidInput, "unknown keyword '" + kw + "'");
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "line " + std::to_string(line_no) + ": " + e.message());
    }
  }
  if (!out.registry) throw Error(ErrorKind::InvalidInput, "empty symbol file");
  return out;
}

SymbolFile load_symbol_file(const std::string& path) { return parse_symbol_file(read_file(path)); }

std::string series_to_text(const FormalSeries& s) {
  const Registry& reg = *s.registry();
  std::ostringstream os;
  os << "weyl-series 1\n";
  os << "dim " << reg.dim() << '\n';
  os << "closed " << (s.closed() ? 1 : 0) << '\n';
  for (int b = 0; b < reg.num_bases(); ++b)
    os << "begin base " << reg.base(b).name << '\n' << SymExpr(s.registry(), reg.base(b).poly).to_text() << "end\n";
  if (reg.has_exp_symbol()) os << "begin exp\n" << SymExpr(s.registry(), reg.exp_symbol()).to_text() << "end\n";
  for (int j = 0; j < s.order(); ++j) os << "begin term " << j << '\n' << s.term(j).to_text() << "end\n";
  return os.str();
}

SeriesFile parse_series_text(const std::string& text, std::shared_ptr<Registry> into) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto next = [&](std::string& l) {
    while (std::getline(in, l)) {
      ++line_no;
      l = trim(l);
      if (!l.empty()) return true;
    }
    return false;
  };
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::InvalidInput, "series line " + std::to_string(line_no) + ": " + what);
  };
  if (!next(line) || line != "weyl-series 1") fail("missing 'weyl-series 1' header");
  if (!next(line) || line.rfind("dim ", 0) != 0) fail("expected 'dim <d>'");
  const int dim = parse_dim(line.substr(4));
  if (into && into->dim() != dim) fail("dimension differs from the target registry");
  auto reg = into ? into : Registry::create(dim);
  if (!next(line) || (line != "closed 0" && line != "closed 1")) fail("expected 'closed 0|1'");
  const bool closed = line == "closed 1";
  std::vector<SymExpr> terms;
  while (next(line)) {
    if (line.rfind("begin ", 0) != 0) fail("expected 'begin'");
    std::istringstream hs(line.substr(6));
    std::string kind, arg;
    hs >> kind >> arg;
    std::string body;
    bool ended = false;
    while (next(line)) {
      if (line == "end") {
        ended = true;
        break;
      }
      body += line + '\n';
    }
    if (!ended) fail("unterminated block");
    SymExpr e = parse_text(reg, body);
    if (kind == "base") {
      if (auto id = reg->find_base(arg)) {
        if (reg->base(*id).poly != e.terms()) fail("base '" + arg + "' conflicts with an existing definition");
      } else {
        reg->add_base(arg, e);
      }
    } else if (kind == "exp") {
      if (reg->has_exp_symbol()) {
        if (reg->exp_symbol() != e.terms()) fail("exponential symbol conflicts with an existing one");
      } else {
        reg->set_exp_symbol(e);
      }
    } else if (kind == "term") {
      if (arg != std::to_string(terms.size())) fail("terms must be numbered 0, 1, ...");
      terms.push_back(e);
    } else {
      fail("unknown block '" + kind + "'");
    }
  }
  return SeriesFile{reg, FormalSeries(reg, std::move(terms), closed)};
}

void save_series(const FormalSeries& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path);
  out << series_to_text(s);
}

SeriesFile load_series(const std::string& path, std::shared_ptr<Registry> into) {
  return parse_series_text(read_file(path), std::move(into));
}

}  // namespace weyl
