#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include "nlcvp/field.hpp"

namespace nlcvp::io {

/// Writes through a temporary file in the same directory, then renames it
/// over the target. Creates the parent directory.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// %.17g
std::string format_double(double v);

/// Comma-separated text with a header row and LF line endings.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& row(std::initializer_list<double> values);
  CsvWriter& row(const std::vector<double>& values);
  const std::string& str() const noexcept { return text_; }
  std::size_t columns() const noexcept { return cols_; }

 private:
  std::string text_;
  std::size_t cols_;
};

/// Two-column table (x, value) with an optional header line, sorted by x.
struct Table {
  std::vector<double> x;
  std::vector<double> y;
};

Table read_table(const std::filesystem::path& path);

/// Piecewise-linear field through the table, constant beyond its ends.
ScalarField tabulated_field(const Table& t);

}  // namespace nlcvp::io
