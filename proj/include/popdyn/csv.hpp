#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "popdyn/types.hpp"

namespace popdyn {

// Shortest text that parses back to the same double (17 significant digits).
std::string format_double(double x);

/// RFC-4180 table built in memory: CRLF line ends, fields quoted only when
/// they contain a comma, quote, CR or LF.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  size_t columns() const { return header_.size(); }

  CsvWriter& Cell(std::string_view text);
  CsvWriter& Cell(double x);
  CsvWriter& Cell(long long x);
  CsvWriter& Cell(int x) { return Cell(static_cast<long long>(x)); }
  CsvWriter& Cells(const Vector& xs);
  // Throws InvalidState unless the row has exactly columns() cells.
  void EndRow();

  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::string> pending_;
};

std::string csv_escape(std::string_view field);

// Splits RFC-4180 text into rows of unescaped fields.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Writes through a sibling temporary file and renames it into place, so the
/// target is either absent, the old content, or complete.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace popdyn
