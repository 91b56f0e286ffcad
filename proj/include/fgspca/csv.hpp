#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fgspca/errors.hpp"
#include "fgspca/linalg.hpp"

namespace fgspca {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

inline bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
  if (b == e) return false;
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

}  // namespace detail

struct CsvTable {
  std::vector<std::string> header;  // empty when has_header was false
  Matrix values;
};

// Comma-separated, decimal-point reals, optional single header row, UTF-8.
// Ragged rows and non-numeric cells are reported with 1-based coordinates.
inline CsvTable read_csv(const std::string& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  size_t lineno = 0;
  size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = detail::split_csv_line(line);
    if (has_header && table.header.empty() && rows.empty()) {
      table.header = cells;
      width = cells.size();
      continue;
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(width) + " columns, got " +
                       std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    for (size_t c = 0; c < cells.size(); ++c) {
      if (!detail::parse_double(cells[c], row[c]))
        throw ParseError(path + ":" + std::to_string(lineno) + ":" +
                         std::to_string(c + 1) + ": not a number: '" +
                         cells[c] + "'");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");
  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(width));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < width; ++j)
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return table;
}

inline std::string format_value(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

inline void write_csv(const std::string& path,
                      const std::vector<std::string>& header,
                      const Matrix& values,
                      const std::vector<std::string>& row_labels = {},
                      int decimals = 4) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  if (!header.empty()) {
    for (size_t j = 0; j < header.size(); ++j)
      out << (j ? "," : "") << header[j];
    out << "\n";
  }
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    std::string line;
    if (!row_labels.empty()) line += row_labels[static_cast<size_t>(i)];
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (!line.empty() || j > 0 || !row_labels.empty()) line += ",";
      line += format_value(values(i, j), decimals);
    }
    out << line << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace fgspca
