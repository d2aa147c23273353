/*
 * Copyright 2026 The rapls Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rapls/io.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace rapls {

ParseError::ParseError(const std::string& source, int line, int column, const std::string& what)
    : Error(ErrorKind::invalid_argument,
            source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

struct Token {
  std::string_view text;
  int column;  // 1-based
};

struct Line {
  int number;  // 1-based
  std::vector<Token> tokens;
};

// Splits into non-blank lines of whitespace-separated tokens; '#' starts a comment.
std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    ++number;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    Line line{number, {}};
    std::size_t k = 0;
    while (k < raw.size()) {
      while (k < raw.size() && std::isspace(static_cast<unsigned char>(raw[k]))) ++k;
      const std::size_t start = k;
      while (k < raw.size() && !std::isspace(static_cast<unsigned char>(raw[k]))) ++k;
      if (k > start) line.tokens.push_back({raw.substr(start, k - start), static_cast<int>(start) + 1});
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

double to_real(const std::string& source, int line, const Token& t) {
  const std::string s(t.text);
  char* stop = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &stop);
  if (stop != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
    throw ParseError(source, line, t.column, "expected a finite number, found '" + s + "'");
  return v;
}

}  // namespace

CurveFile parse_curves(std::string_view text, const std::string& source) {
  const std::vector<Line> lines = tokenize(text);
  if (lines.empty()) throw ParseError(source, 1, 1, "empty file; expected header 'grid: lo hi G'");
  const Line& head = lines.front();
  if (head.tokens.size() != 4 || head.tokens[0].text != "grid:")
    throw ParseError(source, head.number, head.tokens[0].column, "expected header 'grid: lo hi G'");
  const double lo = to_real(source, head.number, head.tokens[1]);
  const double hi = to_real(source, head.number, head.tokens[2]);
  const double gval = to_real(source, head.number, head.tokens[3]);
  if (gval != std::floor(gval) || gval < 2)
    throw ParseError(source, head.number, head.tokens[3].column, "grid size must be an integer >= 2");
  if (!(hi > lo)) throw ParseError(source, head.number, head.tokens[2].column, "grid needs hi > lo");
  const Index g = static_cast<Index>(gval);

  CurveFile out;
  out.grid = make_grid(g, lo, hi);
  out.X.resize(static_cast<Index>(lines.size()) - 1, g);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const Line& l = lines[r];
    if (static_cast<Index>(l.tokens.size()) != g) {
      const int col = static_cast<Index>(l.tokens.size()) > g ? l.tokens[g].column : l.tokens.back().column;
      throw ParseError(source, l.number, col,
                       "expected " + std::to_string(g) + " values, found " + std::to_string(l.tokens.size()));
    }
    for (Index j = 0; j < g; ++j) out.X(static_cast<Index>(r) - 1, j) = to_real(source, l.number, l.tokens[j]);
  }
  if (out.X.rows() == 0) throw ParseError(source, head.number, 1, "no curve rows after the header");
  return out;
}

TableFile parse_table(std::string_view text, const std::string& source) {
  const std::vector<Line> lines = tokenize(text);
  if (lines.empty()) throw ParseError(source, 1, 1, "empty file; expected header 'y z1 ... zq'");
  const Line& head = lines.front();
  if (head.tokens[0].text != "y")
    throw ParseError(source, head.number, head.tokens[0].column, "first column must be named 'y'");
  TableFile out;
  for (const auto& t : head.tokens) out.columns.emplace_back(t.text);
  const Index cols = static_cast<Index>(head.tokens.size());
  const Index n = static_cast<Index>(lines.size()) - 1;
  out.y.resize(n);
  out.Z.resize(n, cols - 1);
  for (Index r = 0; r < n; ++r) {
    const Line& l = lines[static_cast<std::size_t>(r) + 1];
    if (static_cast<Index>(l.tokens.size()) != cols) {
      const int col = static_cast<Index>(l.tokens.size()) > cols ? l.tokens[cols].column : l.tokens.back().column;
      throw ParseError(source, l.number, col,
                       "expected " + std::to_string(cols) + " values, found " + std::to_string(l.tokens.size()));
    }
    out.y[r] = to_real(source, l.number, l.tokens[0]);
    for (Index k = 1; k < cols; ++k) out.Z(r, k - 1) = to_real(source, l.number, l.tokens[k]);
  }
  if (n == 0) throw ParseError(source, head.number, 1, "no data rows after the header");
  return out;
}

namespace {
std::string real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
}  // namespace

void write_curves(std::ostream& os, const Matrix& X, const Grid& grid) {
  os << "grid: " << real(grid.lo()) << ' ' << real(grid.hi()) << ' ' << grid.size() << '\n';
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < X.cols(); ++j) os << (j ? " " : "") << real(X(i, j));
    os << '\n';
  }
}

void write_table(std::ostream& os, const Eigen::Ref<const Vector>& y, const Matrix& Z) {
  os << 'y';
  for (Index k = 0; k < Z.cols(); ++k) os << " z" << (k + 1);
  os << '\n';
  for (Index i = 0; i < y.size(); ++i) {
    os << real(y[i]);
    for (Index k = 0; k < Z.cols(); ++k) os << ' ' << real(Z(i, k));
    os << '\n';
  }
}

void write_function(std::ostream& os, const DiscretizedFunction& f) {
  os << "s value\n";
  const Vector& s = f.grid()->points();
  for (Index j = 0; j < f.size(); ++j) os << real(s[j]) << ' ' << real(f[j]) << '\n';
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) detail::fail(ErrorKind::invalid_argument, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace rapls
