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

#include "rapls/funcore.hpp"

#include <cmath>
#include <numbers>

namespace rapls {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::grid_mismatch: return "grid-mismatch";
    case ErrorKind::collinear_covariates: return "collinear-covariates";
    case ErrorKind::degenerate_seed: return "degenerate-seed";
    case ErrorKind::ill_conditioned_gram: return "ill-conditioned-gram";
    case ErrorKind::degenerate_system: return "degenerate-system";
    case ErrorKind::invalid_outcome: return "invalid-outcome";
    case ErrorKind::non_convergence: return "non-convergence";
    case ErrorKind::score_solve_failure: return "score-solve-failure";
    case ErrorKind::ill_conditioned_calibration: return "ill-conditioned-calibration";
    case ErrorKind::calibration_failure: return "calibration-failure";
    case ErrorKind::degenerate_zeta: return "degenerate-zeta";
    case ErrorKind::rank_deficient: return "rank-deficient";
    case ErrorKind::invalid_fit: return "invalid-fit";
    case ErrorKind::selection_failure: return "selection-failure";
    case ErrorKind::degenerate_replication: return "degenerate-replication";
    case ErrorKind::experiment_failure: return "experiment-failure";
    case ErrorKind::numerical_divergence: return "numerical-divergence";
  }
  return "unknown-error";
}

Grid::Grid(Vector points, Vector weights) : points_(std::move(points)), weights_(std::move(weights)) {
  detail::require(points_.size() >= 2, "grid needs at least two points");
  detail::require(points_.size() == weights_.size(), "grid points and weights differ in length");
  for (Index j = 1; j < points_.size(); ++j)
    detail::require(points_[j] > points_[j - 1], "grid points must be strictly increasing");
  detail::require((weights_.array() >= 0.0).all() && weights_.allFinite(),
                  "quadrature weights must be finite and nonnegative");
  const double len = points_[points_.size() - 1] - points_[0];
  detail::require(std::abs(weights_.sum() - len) <= 1e-12 * len,
                  "quadrature weights must sum to the domain length");
}

bool Grid::same_as(const Grid& other) const noexcept {
  if (this == &other) return true;
  return points_.size() == other.points_.size() && points_ == other.points_ &&
         weights_ == other.weights_;
}

GridPtr make_grid(Index n_points, double lo, double hi) {
  detail::require(n_points >= 2, "make_grid: n_points must be at least 2");
  detail::require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "make_grid: need lo < hi");
  const double h = (hi - lo) / static_cast<double>(n_points - 1);
  Vector points(n_points);
  for (Index j = 0; j < n_points; ++j) points[j] = lo + h * static_cast<double>(j);
  points[n_points - 1] = hi;
  Vector weights = Vector::Constant(n_points, h);
  weights[0] = weights[n_points - 1] = 0.5 * h;
  return std::make_shared<const Grid>(std::move(points), std::move(weights));
}

void check_same_grid(const Grid& a, const Grid& b) {
  if (!a.same_as(b)) detail::fail(ErrorKind::grid_mismatch, "functions live on different grids");
}

DiscretizedFunction::DiscretizedFunction(GridPtr grid, Vector values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  detail::require(grid_ != nullptr, "function requires a grid");
  detail::require(values_.size() == grid_->size(), "function length does not match its grid");
  detail::require(values_.allFinite(), "function values must be finite");
}

DiscretizedFunction DiscretizedFunction::zero(GridPtr grid) {
  const Index g = grid->size();
  return DiscretizedFunction(std::move(grid), Vector::Zero(g));
}

DiscretizedFunction& DiscretizedFunction::operator+=(const DiscretizedFunction& rhs) {
  check_same_grid(*grid_, *rhs.grid_);
  values_ += rhs.values_;
  return *this;
}

DiscretizedFunction& DiscretizedFunction::operator-=(const DiscretizedFunction& rhs) {
  check_same_grid(*grid_, *rhs.grid_);
  values_ -= rhs.values_;
  return *this;
}

DiscretizedFunction& DiscretizedFunction::operator*=(double a) {
  values_ *= a;
  return *this;
}

DiscretizedFunction operator+(DiscretizedFunction lhs, const DiscretizedFunction& rhs) {
  lhs += rhs;
  return lhs;
}

DiscretizedFunction operator-(DiscretizedFunction lhs, const DiscretizedFunction& rhs) {
  lhs -= rhs;
  return lhs;
}

DiscretizedFunction operator*(double a, DiscretizedFunction f) {
  f *= a;
  return f;
}

KernelMatrix::KernelMatrix(GridPtr grid, Matrix values) : grid_(std::move(grid)) {
  detail::require(grid_ != nullptr, "kernel requires a grid");
  const Index g = grid_->size();
  detail::require(values.rows() == g && values.cols() == g, "kernel must be G x G");
  detail::require(values.allFinite(), "kernel entries must be finite");
  values_ = 0.5 * (values + values.transpose());
}

Vector KernelMatrix::apply(const Eigen::Ref<const Vector>& f) const {
  return values_ * grid_->weights().cwiseProduct(f);
}

double inner_product(const DiscretizedFunction& f, const DiscretizedFunction& g) {
  check_same_grid(*f.grid(), *g.grid());
  return (f.grid()->weights().array() * f.values().array() * g.values().array()).sum();
}

double norm(const DiscretizedFunction& f) { return std::sqrt(inner_product(f, f)); }

DiscretizedFunction apply_kernel(const KernelMatrix& K, const DiscretizedFunction& f) {
  check_same_grid(*K.grid(), *f.grid());
  return DiscretizedFunction(K.grid(), K.apply(f.values()));
}

DiscretizedFunction cosine_basis(int k, const GridPtr& grid) {
  detail::require(k >= 1, "cosine_basis: k must be positive");
  detail::require(grid->lo() == 0.0 && grid->hi() == 1.0, "cosine_basis: grid domain must be [0, 1]");
  const double freq = std::numbers::pi * static_cast<double>(k);
  Vector values = (freq * grid->points().array()).cos() * std::numbers::sqrt2;
  return DiscretizedFunction(grid, std::move(values));
}

}  // namespace rapls
