#include "output.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <sstream>

#include "weyl/error.hpp"
#include "weyl/kernels.hpp"

namespace weylcalc {

using weyl::Error;
using weyl::ErrorKind;
using weyl::PhasePoint;

Output::Output(std::string dir, std::string command, std::string config)
    : dir_(std::move(dir)), command_(std::move(command)), config_(std::move(config)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorKind::InvalidInput, "cannot create output directory " + dir_ + ": " + ec.message());
  auto out = open("config.toml");
  out << config_;
}

std::string Output::path(const std::string& name) const { return (std::filesystem::path(dir_) / name).string(); }

std::ofstream Output::open(const std::string& name) {
  std::ofstream out(path(name), std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path(name));
  note(name);
  return out;
}

void Output::write_report(const std::string& name, nlohmann::json report) {
  nlohmann::json cfg = nlohmann::json::object();
  std::istringstream in(config_);
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string value = line.substr(eq + 1);
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    cfg[line.substr(0, eq)] = value;
  }
  report["provenance"] = {{"tool", "weylcalc"}, {"version", kVersion}, {"command", command_}, {"config", cfg}};
  auto out = open(name);
  out << report.dump(2) << '\n';
}

void Output::note(const std::string& name) { files_.push_back(name); }

void Output::finish(int argc, char** argv) const {
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  nlohmann::json meta;
  meta["timestamp"] = stamp;
  meta["command"] = command_;
  meta["argv"] = std::vector<std::string>(argv, argv + argc);
  meta["kernels"] = weyl::kernels::active().name;
  meta["files"] = files_;
  std::ofstream out(path("metadata.json"));
  out << meta.dump(2) << '\n';
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::ofstream out, const std::vector<std::string>& header) : out_(std::move(out)) {
  for (const auto& h : header) *this << h;
  end_row();
}

void CsvWriter::sep() {
  if (!first_) out_ << ',';
  first_ = false;
}

CsvWriter& CsvWriter::operator<<(double v) {
  sep();
  out_ << num(v);
  return *this;
}

CsvWriter& CsvWriter::operator<<(long v) {
  sep();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& v) {
  sep();
  out_ << v;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

std::vector<PhasePoint> random_points(std::uint64_t seed, int count, double radius, int dim) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<PhasePoint> out;
  for (int i = 0; i < count; ++i) {
    PhasePoint p;
    p.x.resize(static_cast<std::size_t>(dim));
    p.xi.resize(static_cast<std::size_t>(dim));
    for (auto& v : p.x) v = u(rng);
    for (auto& v : p.xi) v = u(rng);
    out.push_back(p);
  }
  return out;
}

std::vector<PhasePoint> read_points(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot read " + path);
  std::vector<PhasePoint> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    for (auto& c : line)
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    std::istringstream ls(line);
    std::vector<double> vals;
    double v;
    while (ls >> v) vals.push_back(v);
    if (!ls.eof()) {
      if (out.empty() && line_no == 1) continue;  // header
      throw Error(ErrorKind::InvalidInput, path + " line " + std::to_string(line_no) + ": not a number");
    }
    if (static_cast<int>(vals.size()) != 2 * dim)
      throw Error(ErrorKind::InvalidInput,
                  path + " line " + std::to_string(line_no) + ": expected " + std::to_string(2 * dim) + " columns");
    PhasePoint p;
    p.x.assign(vals.begin(), vals.begin() + dim);
    p.xi.assign(vals.begin() + dim, vals.end());
    out.push_back(p);
  }
  if (out.empty()) throw Error(ErrorKind::InvalidInput, path + ": no points");
  return out;
}

std::vector<std::string> point_header(int dim) {
  std::vector<std::string> h;
  for (int i = 1; i <= dim; ++i) h.push_back("x" + std::to_string(i));
  for (int i = 1; i <= dim; ++i) h.push_back("xi" + std::to_string(i));
  return h;
}

void append_point(CsvWriter& w, const PhasePoint& p) {
  for (double v : p.x) w << v;
  for (double v : p.xi) w << v;
}

nlohmann::json point_json(const PhasePoint& p) { return {{"x", p.x}, {"xi", p.xi}}; }

}  // namespace weylcalc
