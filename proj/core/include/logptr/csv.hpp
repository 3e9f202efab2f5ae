#pragma once

#include <string>
#include <vector>

namespace logptr {

// RFC-4180 table: quoted fields may contain commas, doubled quotes and
// line breaks. Rows keep their 1-based position in the file (header = 1)
// so errors can name the offending row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<long> row_numbers;

  // -1 when absent; names are matched case-sensitively.
  int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

// Minimal writer for fixtures and reports; quotes only when needed.
std::string csv_escape(const std::string& field);

}  // namespace logptr
