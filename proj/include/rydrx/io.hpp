#pragma once

// File artifacts: CSV for arrays, JSON strings are produced by the callers.
// Numbers are printed with %.17g so a written value re-reads to the same
// double and repeated runs diff clean.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rydrx/errors.hpp"

namespace rydrx {

inline std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "' for reading");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

// Column-major CSV: header names one column each, all columns equal length.
inline std::string render_csv(const std::vector<std::string>& header,
                              const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size())
    throw ConfigError("CSV header names " + std::to_string(header.size()) +
                      " columns, got " + std::to_string(columns.size()));
  if (columns.empty()) throw ConfigError("CSV needs at least one column");
  std::size_t rows = columns.front().size();
  for (const std::vector<double>& c : columns)
    if (c.size() != rows) throw ConfigError("CSV columns differ in length");

  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out += ',';
    out += header[j];
  }
  out += '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j) out += ',';
      out += format_g17(columns[j][i]);
    }
    out += '\n';
  }
  return out;
}

inline void write_csv(const std::string& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
  write_text_file(path, render_csv(header, columns));
}

// One sample per line; blank lines and '#' comments are skipped. A single
// leading non-numeric line is tolerated as a header.
inline std::vector<double> read_sample_column(const std::string& text) {
  std::vector<double> samples;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    try {
      std::size_t used = 0;
      double v = std::stod(line.substr(start), &used);
      samples.push_back(v);
      (void)used;
    } catch (const std::exception&) {
      if (first) {
        first = false;
        continue;  // header row
      }
      throw ConfigError("bad sample line '" + line + "'");
    }
    first = false;
  }
  if (samples.empty()) throw ConfigError("sample file holds no samples");
  return samples;
}

}  // namespace rydrx
