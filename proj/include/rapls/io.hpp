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

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rapls/funcore.hpp"

namespace rapls {

/// Malformed text input; the message carries "source:line:column".
class ParseError : public Error {
 public:
  ParseError(const std::string& source, int line, int column, const std::string& what);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Curves on a uniform grid. Text form: a header line "grid: lo hi G",
/// then one whitespace-separated row of G values per subject.
struct CurveFile {
  GridPtr grid;
  Matrix X;
};

/// Outcome and scalar covariates. Text form: a header "y z1 ... zq", then
/// one row per subject.
struct TableFile {
  std::vector<std::string> columns;
  Vector y;
  Matrix Z;
};

CurveFile parse_curves(std::string_view text, const std::string& source = "<curves>");
TableFile parse_table(std::string_view text, const std::string& source = "<table>");

void write_curves(std::ostream& os, const Matrix& X, const Grid& grid);
void write_table(std::ostream& os, const Eigen::Ref<const Vector>& y, const Matrix& Z);
/// Two columns "s value", one row per grid point.
void write_function(std::ostream& os, const DiscretizedFunction& f);

/// Reads a whole file; throws invalid-argument when it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace rapls
