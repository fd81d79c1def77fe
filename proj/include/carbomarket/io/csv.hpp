#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace carbomarket::io {

// Plain comma-separated table; fields never contain commas or quotes.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index, or -1.
  int Column(std::string_view name) const;
  double Number(std::size_t row, int col) const;
};

// Throws Error(kData, "E_CSV") with the file and line on malformed input.
CsvTable ReadCsv(const std::string& path);
CsvTable ParseCsv(std::string_view text, const std::string& source);
void WriteCsv(const std::string& path, const CsvTable& table);

// Shortest decimal that reads back to the same double.
std::string FormatNumber(double v);
// Throws Error(kData, "E_CSV") when `text` is not a complete number.
double ParseNumber(std::string_view text, const std::string& where);

}  // namespace carbomarket::io
