#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dfcgcn/common.hpp"

namespace dfcgcn::csv {

/// Format a double so it round-trips exactly and prints identically on every
/// run (emitted files must be byte-reproducible).
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline double parse_double(std::string_view tok, const std::string& context) {
  double out = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    fail(Errc::parse, "non-numeric cell '" + std::string(tok) + "' in " + context);
  return out;
}

/// Read a headerless numeric CSV into a dense matrix. Rejects ragged rows,
/// non-numeric cells, and non-finite values.
inline Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      std::string_view tok(line.data() + start,
                           (comma == std::string::npos ? line.size() : comma) - start);
      double v = parse_double(tok, path.string());
      if (!std::isfinite(v)) fail(Errc::non_finite, "non-finite value in " + path.string());
      row.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (width == 0)
      width = row.size();
    else if (row.size() != width)
      fail(Errc::parse, "ragged row in " + path.string());
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

inline void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot write " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

/// Edge list "i,j" with i < j, one undirected edge per line.
inline void write_edge_list(const std::filesystem::path& path, const BinaryMatrix& adj) {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot write " + path.string());
  for (Eigen::Index i = 0; i < adj.rows(); ++i)
    for (Eigen::Index j = i + 1; j < adj.cols(); ++j)
      if (adj(i, j)) out << i << ',' << j << '\n';
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, "cannot write " + path.string());
  out << content;
}

}  // namespace dfcgcn::csv
