#include "nlcvp/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "nlcvp/errors.hpp"

namespace nlcvp::io {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw Error(ErrorKind::config, "cannot create output directory " + parent.string() + ": " + ec.message());
  const fs::path tmp = parent / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::config, "cannot write " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    if (!os) {
      fs::remove(tmp, ec);
      throw Error(ErrorKind::config, "write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::config, "cannot move output into place: " + path.string());
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : cols_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text_ += ',';
    text_ += header[i];
  }
  text_ += '\n';
}

CsvWriter& CsvWriter::row(std::initializer_list<double> values) { return row(std::vector<double>(values)); }

CsvWriter& CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != cols_) throw Error(ErrorKind::domain, "csv: row width does not match the header");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) text_ += ',';
    text_ += format_double(values[i]);
  }
  text_ += '\n';
  return *this;
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::config, "cannot open data file " + path.string());
  Table t;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x, y;
    if (!(ls >> x >> y)) {
      if (lineno == 1) continue;  // header
      throw Error(ErrorKind::config, path.string() + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    t.x.push_back(x);
    t.y.push_back(y);
  }
  if (t.x.size() < 2) throw Error(ErrorKind::config, path.string() + ": need at least two data rows");
  std::vector<std::size_t> idx(t.x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return t.x[a] < t.x[b]; });
  Table s;
  for (std::size_t i : idx) {
    if (!s.x.empty() && t.x[i] == s.x.back()) {
      throw Error(ErrorKind::config, path.string() + ": repeated abscissa");
    }
    s.x.push_back(t.x[i]);
    s.y.push_back(t.y[i]);
  }
  return s;
}

ScalarField tabulated_field(const Table& t) {
  auto f = [t](double x) {
    if (x <= t.x.front()) return t.y.front();
    if (x >= t.x.back()) return t.y.back();
    const auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - t.x.begin());
    const double w = (x - t.x[j - 1]) / (t.x[j] - t.x[j - 1]);
    return (1.0 - w) * t.y[j - 1] + w * t.y[j];
  };
  ScalarField u(f, Regularity::p1_discrete);
  u.with_breakpoints(t.x).with_name("table");
  return u;
}

}  // namespace nlcvp::io
