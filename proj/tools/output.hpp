#pragma once

// Output directory handling for weylcalc: payload files are deterministic,
// run-specific facts (timestamp, argv, kernel variant) go to metadata.json.

#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "weyl/symexpr.hpp"

namespace weylcalc {

inline constexpr const char* kVersion = "0.3.0";

class Output {
 public:
  /// `config` is TOML text; it is saved as config.toml and echoed in every report.
  Output(std::string dir, std::string command, std::string config);

  std::string path(const std::string& name) const;
  std::ofstream open(const std::string& name);
  /// Adds the provenance block and writes pretty-printed JSON.
  void write_report(const std::string& name, nlohmann::json report);
  /// Records a file written by a library routine.
  void note(const std::string& name);
  void finish(int argc, char** argv) const;

 private:
  std::string dir_;
  std::string command_;
  std::string config_;
  std::vector<std::string> files_;
};

/// %.17g, so that re-runs reproduce the text exactly.
std::string num(double v);

class CsvWriter {
 public:
  CsvWriter(std::ofstream out, const std::vector<std::string>& header);
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(long v);
  CsvWriter& operator<<(int v) { return *this << static_cast<long>(v); }
  CsvWriter& operator<<(const std::string& v);
  void end_row();

 private:
  void sep();
  std::ofstream out_;
  bool first_ = true;
};

std::vector<weyl::PhasePoint> random_points(std::uint64_t seed, int count, double radius, int dim);
/// Rows of 2d numbers (x_1..x_d, xi_1..xi_d); a non-numeric first line is a header.
std::vector<weyl::PhasePoint> read_points(const std::string& path, int dim);
std::vector<std::string> point_header(int dim);
void append_point(CsvWriter& w, const weyl::PhasePoint& p);
nlohmann::json point_json(const weyl::PhasePoint& p);

}  // namespace weylcalc
