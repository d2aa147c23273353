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

#include <string_view>

#include "rapls/funcore.hpp"

namespace rapls {

/// Canonical-link exponential families, density h(y) exp{eta T(y) - A(eta)}
/// with T(y) = y for all three.
enum class ExpFamily { gaussian, poisson, bernoulli };

std::string_view to_string(ExpFamily fam);
/// Throws invalid-argument for unknown names.
ExpFamily parse_family(std::string_view name);

/// Information weights are clamped below at this value before inversion.
inline constexpr double kWeightFloor = 1e-8;
/// Poisson mean and variance are evaluated with eta capped here.
inline constexpr double kPoissonEtaCap = 30.0;

bool in_support(ExpFamily fam, double y);
/// Throws invalid-outcome when y is outside the family support.
void check_outcome(ExpFamily fam, double y);
void check_outcomes(ExpFamily fam, const Eigen::Ref<const Vector>& y);

/// A(eta), uncapped.
double cumulant(ExpFamily fam, double eta);
/// A'(eta), the mean; Poisson uses the capped eta.
double mean_value(ExpFamily fam, double eta);
/// Canonical link g(mu), used for intercept-only starting values.
double canonical_link(ExpFamily fam, double mu);

/// log p(y; eta); the Gaussian uses unit dispersion.
double loglik(ExpFamily fam, double y, double eta);
/// r(y, eta) = T(y) - A'(eta).
double score(ExpFamily fam, double y, double eta);
/// w(eta) = A''(eta), clamped below at kWeightFloor.
double info_weight(ExpFamily fam, double eta);
/// eta + r(y, eta) / w(eta); exactly y for the Gaussian.
double pseudo_response(ExpFamily fam, double y, double eta);

/// True when eta is beyond the Poisson overflow guard.
bool eta_overflows(ExpFamily fam, double eta);

double total_loglik(ExpFamily fam, const Eigen::Ref<const Vector>& y,
                    const Eigen::Ref<const Vector>& eta);
Vector info_weights(ExpFamily fam, const Eigen::Ref<const Vector>& eta);
Vector scores(ExpFamily fam, const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& eta);
Vector pseudo_responses(ExpFamily fam, const Eigen::Ref<const Vector>& y,
                        const Eigen::Ref<const Vector>& eta);

}  // namespace rapls
