#pragma once

// Symbol files (hand-written infix) and series files (exact term lines).
//
// Symbol file:
//   # comment
//   dim 1
//   base a = 1 + x^2 + xi^2
//   exp = a^(1/2)          optional, the b in exp(-t b)
//   symbol = a^(1/2) + x
//
// Series file:
//   weyl-series 1
//   dim 1
//   closed 0
//   begin base a
//   term ...               SymExpr::to_text lines
//   end
//   begin exp              optional
//   end
//   begin term 0
//   end

#include <memory>
#include <optional>
#include <string>

#include "weyl/fsring.hpp"

namespace weyl {

struct SymbolFile {
  std::shared_ptr<Registry> registry;
  std::optional<SymExpr> symbol;
};

SymbolFile parse_symbol_file(const std::string& text);
SymbolFile load_symbol_file(const std::string& path);

struct SeriesFile {
  std::shared_ptr<Registry> registry;
  FormalSeries series;
};

std::string series_to_text(const FormalSeries& s);
/// With `into`, bases and the exponential symbol are merged into that registry
/// (same name must mean the same polynomial) so several files can be combined.
SeriesFile parse_series_text(const std::string& text, std::shared_ptr<Registry> into = nullptr);
void save_series(const FormalSeries& s, const std::string& path);
SeriesFile load_series(const std::string& path, std::shared_ptr<Registry> into = nullptr);

}  // namespace weyl
