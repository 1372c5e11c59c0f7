#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "cis/dataset.hpp"

namespace cis {

// shortest round-trippable decimal form; all numeric file output goes through here
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

inline double parse_cell(const std::string& cell, int data_row, const std::string& col_name) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  while (ptr < last && (*ptr == ' ' || *ptr == '\t')) ++ptr;
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw error("load_csv: non-numeric cell at row " + std::to_string(data_row) +
                ", column '" + col_name + "'");
  }
  return v;
}

}  // namespace detail

// header row required; no quoting or embedded commas supported
inline Dataset load_csv(const std::string& path, const std::string& response_column) {
  std::ifstream in(path);
  require(in.good(), "load_csv: cannot open '" + path + "'");
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "load_csv: empty file '" + path + "'");
  std::vector<std::string> header = detail::split_line(detail::strip_cr(line));
  int y_col = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == response_column) {
      require(y_col < 0, "load_csv: duplicate response column '" + response_column + "'");
      y_col = (int)j;
    }
  }
  require(y_col >= 0, "load_csv: response column '" + response_column + "' not found");

  int p = (int)header.size() - 1;
  require(p >= 1, "load_csv: no predictor columns");
  std::vector<double> y_vals;
  std::vector<std::vector<double>> cols(p);
  int data_row = 0;
  while (std::getline(in, line)) {
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    ++data_row;
    std::vector<std::string> cells = detail::split_line(line);
    require((int)cells.size() == (int)header.size(),
            "load_csv: row " + std::to_string(data_row) + " has " +
                std::to_string(cells.size()) + " cells, expected " +
                std::to_string(header.size()));
    int k = 0;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      double v = detail::parse_cell(cells[j], data_row, header[j]);
      if ((int)j == y_col) {
        y_vals.push_back(v);
      } else {
        cols[k++].push_back(v);
      }
    }
  }
  require(data_row >= 2, "load_csv: need at least 2 data rows, got " + std::to_string(data_row));

  Dataset d;
  d.n = data_row;
  d.p = p;
  d.y = Eigen::Map<Eigen::VectorXd>(y_vals.data(), data_row);
  d.X.resize(data_row, p);
  for (int j = 0; j < p; ++j) {
    d.X.col(j) = Eigen::Map<Eigen::VectorXd>(cols[j].data(), data_row);
  }
  d.names.reserve(p);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if ((int)j != y_col) d.names.push_back(header[j]);
  }
  return d;
}

// response first, then predictors in order; values round-trip exactly through load_csv
inline void write_csv(const Dataset& d, const std::string& path,
                      const std::string& response_name = "y") {
  validate_dataset(d);
  std::ofstream out(path);
  require(out.good(), "write_csv: cannot open '" + path + "' for writing");
  const std::vector<std::string> names = d.names.empty() ? default_names(d.p) : d.names;
  out << response_name;
  for (int j = 0; j < d.p; ++j) out << ',' << names[j];
  out << '\n';
  for (int i = 0; i < d.n; ++i) {
    out << fmt_double(d.y[i]);
    for (int j = 0; j < d.p; ++j) out << ',' << fmt_double(d.X(i, j));
    out << '\n';
  }
  require(out.good(), "write_csv: write failed for '" + path + "'");
}

}  // namespace cis
