#include "logptr/csv.hpp"

#include <fstream>
#include <sstream>

#include "logptr/error.hpp"

namespace logptr {

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

// One pass over the raw text. Quotes open only at field start; a doubled
// quote inside a quoted field is a literal quote.
std::vector<std::pair<long, std::vector<std::string>>> parse_rows(const std::string& text) {
  std::vector<std::pair<long, std::vector<std::string>>> out;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  long line = 1;
  long row_start_line = 1;

  auto end_field = [&] {
    row.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    out.emplace_back(row_start_line, row);
    row.clear();
    row_start_line = line;
  };

  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field += '"';
          i += 2;
        } else {
          quoted = false;
          ++i;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
        ++i;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          quoted = true;
        } else {
          field += c;  // stray quote mid-field, keep it
        }
        field_started = true;
        ++i;
        break;
      case ',':
        end_field();
        ++i;
        break;
      case '\r':
        if (i + 1 < n && text[i + 1] == '\n') ++i;
        [[fallthrough]];
      case '\n':
        ++line;
        end_row();
        row_start_line = line;
        ++i;
        break;
      default:
        field += c;
        field_started = true;
        ++i;
        break;
    }
  }
  if (quoted) raise(Errc::MalformedRow, "unterminated quoted field at end of file");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return out;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  auto rows = parse_rows(text);
  if (rows.empty()) return table;
  table.header = rows.front().second;
  for (size_t i = 1; i < rows.size(); ++i) {
    // tolerate blank trailing lines
    if (rows[i].second.size() == 1 && rows[i].second[0].empty()) continue;
    table.row_numbers.push_back(rows[i].first);
    table.rows.push_back(std::move(rows[i].second));
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::IoError, "cannot open CSV file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string csv_escape(const std::string& field) {
  bool needs_quotes = field.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace logptr
