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

#include "rapls/expfam.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace rapls {

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string_view to_string(ExpFamily fam) {
  switch (fam) {
    case ExpFamily::gaussian: return "gaussian";
    case ExpFamily::poisson: return "poisson";
    case ExpFamily::bernoulli: return "bernoulli";
  }
  return "unknown";
}

ExpFamily parse_family(std::string_view name) {
  if (name == "gaussian") return ExpFamily::gaussian;
  if (name == "poisson") return ExpFamily::poisson;
  if (name == "bernoulli" || name == "binomial") return ExpFamily::bernoulli;
  detail::fail(ErrorKind::invalid_argument, "unknown family '" + std::string(name) + "'");
}

bool in_support(ExpFamily fam, double y) {
  if (!std::isfinite(y)) return false;
  switch (fam) {
    case ExpFamily::gaussian: return true;
    case ExpFamily::poisson: return y >= 0.0 && y == std::floor(y);
    case ExpFamily::bernoulli: return y == 0.0 || y == 1.0;
  }
  return false;
}

void check_outcome(ExpFamily fam, double y) {
  if (!in_support(fam, y))
    detail::fail(ErrorKind::invalid_outcome,
                 "outcome " + std::to_string(y) + " outside the " + std::string(to_string(fam)) + " support");
}

void check_outcomes(ExpFamily fam, const Eigen::Ref<const Vector>& y) {
  for (Index i = 0; i < y.size(); ++i) {
    if (!in_support(fam, y[i]))
      detail::fail(ErrorKind::invalid_outcome, "outcome " + std::to_string(y[i]) + " (row " +
                                                   std::to_string(i + 1) + ") outside the " +
                                                   std::string(to_string(fam)) + " support");
  }
}

double cumulant(ExpFamily fam, double eta) {
  switch (fam) {
    case ExpFamily::gaussian: return 0.5 * eta * eta;
    case ExpFamily::poisson: return std::exp(eta);
    case ExpFamily::bernoulli: return softplus(eta);
  }
  return 0.0;
}

double mean_value(ExpFamily fam, double eta) {
  switch (fam) {
    case ExpFamily::gaussian: return eta;
    case ExpFamily::poisson: return std::exp(std::min(eta, kPoissonEtaCap));
    case ExpFamily::bernoulli: return logistic(eta);
  }
  return 0.0;
}

double canonical_link(ExpFamily fam, double mu) {
  switch (fam) {
    case ExpFamily::gaussian: return mu;
    case ExpFamily::poisson: return std::log(std::max(mu, 1e-8));
    case ExpFamily::bernoulli: {
      const double p = std::clamp(mu, 1e-8, 1.0 - 1e-8);
      return std::log(p / (1.0 - p));
    }
  }
  return 0.0;
}

double loglik(ExpFamily fam, double y, double eta) {
  check_outcome(fam, y);
  switch (fam) {
    case ExpFamily::gaussian: {
      const double r = y - eta;
      return -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * r * r;
    }
    case ExpFamily::poisson: return y * eta - std::exp(eta) - std::lgamma(y + 1.0);
    case ExpFamily::bernoulli: return y * eta - softplus(eta);
  }
  return 0.0;
}

double score(ExpFamily fam, double y, double eta) {
  check_outcome(fam, y);
  return y - mean_value(fam, eta);
}

double info_weight(ExpFamily fam, double eta) {
  double w = 1.0;
  switch (fam) {
    case ExpFamily::gaussian: w = 1.0; break;
    case ExpFamily::poisson: w = std::exp(std::min(eta, kPoissonEtaCap)); break;
    case ExpFamily::bernoulli: {
      const double p = logistic(eta);
      w = p * (1.0 - p);
      break;
    }
  }
  return std::max(w, kWeightFloor);
}

double pseudo_response(ExpFamily fam, double y, double eta) {
  if (fam == ExpFamily::gaussian) {
    check_outcome(fam, y);
    return y;
  }
  return eta + score(fam, y, eta) / info_weight(fam, eta);
}

bool eta_overflows(ExpFamily fam, double eta) { return fam == ExpFamily::poisson && eta > kPoissonEtaCap; }

double total_loglik(ExpFamily fam, const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& eta) {
  detail::require(y.size() == eta.size(), "total_loglik: length mismatch");
  double s = 0.0;
  for (Index i = 0; i < y.size(); ++i) s += loglik(fam, y[i], eta[i]);
  return s;
}

Vector info_weights(ExpFamily fam, const Eigen::Ref<const Vector>& eta) {
  Vector w(eta.size());
  for (Index i = 0; i < eta.size(); ++i) w[i] = info_weight(fam, eta[i]);
  return w;
}

Vector scores(ExpFamily fam, const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& eta) {
  detail::require(y.size() == eta.size(), "scores: length mismatch");
  Vector r(y.size());
  for (Index i = 0; i < y.size(); ++i) r[i] = score(fam, y[i], eta[i]);
  return r;
}

Vector pseudo_responses(ExpFamily fam, const Eigen::Ref<const Vector>& y,
                        const Eigen::Ref<const Vector>& eta) {
  detail::require(y.size() == eta.size(), "pseudo_responses: length mismatch");
  Vector out(y.size());
  for (Index i = 0; i < y.size(); ++i) out[i] = pseudo_response(fam, y[i], eta[i]);
  return out;
}

}  // namespace rapls
