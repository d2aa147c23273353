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

#include <stdexcept>
#include <string>
#include <string_view>

namespace rapls {

/// Typed failure categories raised by the library. The CLI reports the
/// kebab-case name returned by to_string().
enum class ErrorKind {
  invalid_argument,
  grid_mismatch,
  collinear_covariates,
  degenerate_seed,
  ill_conditioned_gram,
  degenerate_system,
  invalid_outcome,
  non_convergence,
  score_solve_failure,
  ill_conditioned_calibration,
  calibration_failure,
  degenerate_zeta,
  rank_deficient,
  invalid_fit,
  selection_failure,
  degenerate_replication,
  experiment_failure,
  numerical_divergence,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return to_string(kind_); }

  /// True for failures caused by malformed inputs rather than numerics.
  bool is_input_error() const noexcept {
    return kind_ == ErrorKind::invalid_argument || kind_ == ErrorKind::grid_mismatch ||
           kind_ == ErrorKind::invalid_outcome;
  }

 private:
  ErrorKind kind_;
};

/// Krylov Gram matrix too ill-conditioned; carries the largest leading
/// order that is still usable.
class IllConditionedGram : public Error {
 public:
  IllConditionedGram(int requested_p, int usable_p, double condition)
      : Error(ErrorKind::ill_conditioned_gram,
              "condition estimate " + std::to_string(condition) + " at p=" +
                  std::to_string(requested_p) + "; largest usable p=" + std::to_string(usable_p)),
        requested_p_(requested_p),
        usable_p_(usable_p),
        condition_(condition) {}

  int requested_p() const noexcept { return requested_p_; }
  int usable_p() const noexcept { return usable_p_; }
  double condition() const noexcept { return condition_; }

 private:
  int requested_p_;
  int usable_p_;
  double condition_;
};

/// FPCA asked for more components than the numerical rank supports.
class RankDeficient : public Error {
 public:
  RankDeficient(int requested, int attainable)
      : Error(ErrorKind::rank_deficient, "requested " + std::to_string(requested) +
                                             " components, numerical rank is " +
                                             std::to_string(attainable)),
        attainable_(attainable) {}

  int attainable() const noexcept { return attainable_; }

 private:
  int attainable_;
};

namespace detail {
[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }
inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::invalid_argument, what);
}
}  // namespace detail

}  // namespace rapls
