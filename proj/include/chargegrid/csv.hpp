#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "chargegrid/error.hpp"

namespace chargegrid {

/// One data row of a headered CSV file (plain comma separation, no quoting).
struct CsvRow {
  std::string file;
  std::size_t line = 0;
  std::shared_ptr<const std::vector<std::string>> header;
  std::vector<std::string> cells;

  std::string where() const { return file + ":" + std::to_string(line); }

  bool has(const std::string& col) const {
    for (std::size_t i = 0; i < header->size(); ++i)
      if ((*header)[i] == col) return i < cells.size() && !cells[i].empty();
    return false;
  }

  const std::string& get(const std::string& col) const {
    for (std::size_t i = 0; i < header->size(); ++i)
      if ((*header)[i] == col) {
        if (i >= cells.size() || cells[i].empty())
          throw IngestionError(where() + ": missing value for '" + col + "'");
        return cells[i];
      }
    throw IngestionError(where() + ": no column '" + col + "'");
  }

  double as_double(const std::string& col) const {
    const auto& s = get(col);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw IngestionError(where() + ": '" + col + "' is not a number: " + s);
    return v;
  }

  std::int64_t as_int(const std::string& col) const {
    const auto& s = get(col);
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw IngestionError(where() + ": '" + col + "' is not an integer: " + s);
    return v;
  }
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  out.push_back(cell);
  for (auto& c : out) {
    const auto b = c.find_first_not_of(" \t");
    const auto e = c.find_last_not_of(" \t");
    c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
  }
  return out;
}

/// Reads a headered CSV file; every name in `required` must be a column.
inline CsvTable read_csv(const std::string& path, const std::vector<std::string>& required) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path);
  CsvTable t;
  std::shared_ptr<const std::vector<std::string>> header;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (t.header.empty()) {
      t.header = split_csv_line(line);
      header = std::make_shared<const std::vector<std::string>>(t.header);
      for (const auto& r : required) {
        bool found = false;
        for (const auto& h : t.header) found = found || h == r;
        if (!found) throw IngestionError(path + ":" + std::to_string(no) + ": missing column '" + r + "'");
      }
      continue;
    }
    CsvRow row{path, no, header, split_csv_line(line)};
    if (row.cells.size() > t.header.size())
      throw IngestionError(row.where() + ": more cells than header columns");
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw IngestionError(path + ": empty file");
  return t;
}

}  // namespace chargegrid
