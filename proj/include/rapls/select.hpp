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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rapls/irls.hpp"

namespace rapls {

enum class Method { rapls, fpcr };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

/// Number of free parameters: p + q + 1, plus one for the Gaussian
/// dispersion.
int degrees_of_freedom(ExpFamily fam, int p, Index q);

/// -2 loglik + 2 df. Throws invalid-fit for a non-converged fit.
double aic(const RaplsFit& fit, const Dataset& d, ExpFamily fam);

struct PFailure {
  int p = 0;
  ErrorKind kind = ErrorKind::invalid_argument;
  std::string message;
};

struct SelectionResult {
  int best_p = 0;
  std::vector<std::pair<int, double>> aic_curve;
  int fits_considered = 0;
  std::vector<PFailure> failures;
  /// Set when the sweep stopped early on a conditioning or rank limit.
  std::optional<int> truncated_at;
  std::optional<RaplsFit> best_fit;
};

/// Every p in the sweep failed.
class SelectionFailure : public Error {
 public:
  explicit SelectionFailure(std::vector<PFailure> failures);
  const std::vector<PFailure>& failures() const noexcept { return failures_; }

 private:
  std::vector<PFailure> failures_;
};

/// Fits p = 1..p_max and returns the AIC minimizer (smallest p on ties).
/// The sweep stops at the first ill-conditioned Gram system, degenerate
/// system or rank limit; other per-p failures are recorded and skipped.
/// cfg.p is ignored.
SelectionResult select_p(const Dataset& d, ExpFamily fam, int p_max, const FitConfig& cfg, Method method);

/// Fit of one method at a fixed p (RAPLS via IRLS, FPCR via the PC GLM).
RaplsFit fit_method(const Dataset& d, ExpFamily fam, const FitConfig& cfg, Method method);

}  // namespace rapls
