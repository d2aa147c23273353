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

#include <cstdint>
#include <memory>
#include <utility>
#include <variant>

#include "rapls/raplscore.hpp"

namespace rapls {

/// b = 0 and the scalar-only GLM for (alpha0, alpha).
struct DeterministicInit {};

/// b drawn from the zero-mean Gaussian process with kernel
/// exp(-10 (s - t)^2), then the scalar GLM with that offset.
struct RandomInit {
  std::uint64_t seed = 0;
};

/// Starting values on the original data scale.
struct ExplicitInit {
  double alpha0 = 0.0;
  Vector alpha;
  DiscretizedFunction b;
};

using InitSpec = std::variant<DeterministicInit, RandomInit, ExplicitInit>;

/// How the inner linear step residualizes the pseudo-responses.
/// `weighted` uses the current information weights (covariates augmented
/// with sqrt(w), curves and pseudo-responses scaled by sqrt(w)); `unweighted`
/// reuses the plain residual covariance of the centered data.
enum class Residualization { weighted, unweighted };

std::string_view to_string(Residualization r);
Residualization parse_residualization(std::string_view name);

/// `halving` shortens the move towards a proposed b, up to kMaxHalvings
/// times, when the proposal's score equations fail or its log-likelihood
/// falls by more than kCollapseFraction of the current value. Fixed points
/// are unchanged and the stopping rule still measures the full proposal.
/// Never used for the Gaussian family.
enum class StepControl { none, halving };

std::string_view to_string(StepControl s);
StepControl parse_step_control(std::string_view name);

inline constexpr int kMaxHalvings = 10;
inline constexpr double kCollapseFraction = 0.1;

struct FitConfig {
  int p = 1;
  double tol = 1e-4;
  int max_iter = 100;
  InitSpec init = DeterministicInit{};
  Residualization residualization = Residualization::weighted;
  StepControl step_control = StepControl::halving;
  FitOptions krylov;
};

/// Outer loop ran out of iterations; carries the last iterate.
class NonConvergence : public Error {
 public:
  explicit NonConvergence(RaplsFit last);
  const RaplsFit& last() const noexcept { return *last_; }

 private:
  std::shared_ptr<const RaplsFit> last_;
};

struct GlmSolution {
  Vector coef;
  int steps = 0;
  double loglik = 0.0;
};

/// Newton-Raphson for the canonical-link GLM y ~ D coef + offset, with
/// step halving on the log-likelihood. Stops at ||D^T r|| <= 1e-10 n.
/// Throws collinear-covariates on a singular Fisher matrix and
/// score-solve-failure after max_steps or on Bernoulli separation.
GlmSolution glm_newton(const Matrix& D, const Eigen::Ref<const Vector>& y, ExpFamily fam,
                       const Eigen::Ref<const Vector>& offset, const Eigen::Ref<const Vector>& start,
                       int max_steps = 50);

/// Solves the score equations for (alpha0, alpha) with b held fixed, on the
/// original data scale.
std::pair<double, Vector> solve_alpha_score(const Dataset& d, ExpFamily fam, const DiscretizedFunction& b_fixed,
                                            double alpha0_start, const Eigen::Ref<const Vector>& alpha_start);

/// IRLS fit of the generalized functional linear model with p components.
RaplsFit fit_gflm(const Dataset& d, ExpFamily fam, const FitConfig& cfg);

/// Starting coefficient function of a random initialization.
DiscretizedFunction random_initial_path(const GridPtr& grid, std::uint64_t seed);

/// log-likelihood of fam at eta; Gaussian uses the profile (sigma^2 = RSS/n).
double fitted_loglik(ExpFamily fam, const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& eta);

}  // namespace rapls
