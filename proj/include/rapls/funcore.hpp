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

#include <Eigen/Dense>

#include <memory>

#include "rapls/errors.hpp"

namespace rapls {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Sampling points of a one-dimensional domain together with trapezoid
/// quadrature weights. Immutable; shared between every function of a fit.
class Grid {
 public:
  Grid(Vector points, Vector weights);

  const Vector& points() const noexcept { return points_; }
  const Vector& weights() const noexcept { return weights_; }
  Index size() const noexcept { return points_.size(); }
  double lo() const noexcept { return points_[0]; }
  double hi() const noexcept { return points_[points_.size() - 1]; }
  double length() const noexcept { return hi() - lo(); }

  bool same_as(const Grid& other) const noexcept;

 private:
  Vector points_;
  Vector weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Equally spaced grid including both endpoints, trapezoid weights.
GridPtr make_grid(Index n_points, double lo, double hi);

/// Real function sampled on a grid.
class DiscretizedFunction {
 public:
  DiscretizedFunction(GridPtr grid, Vector values);

  /// Zero function on `grid`.
  static DiscretizedFunction zero(GridPtr grid);

  const GridPtr& grid() const noexcept { return grid_; }
  const Vector& values() const noexcept { return values_; }
  Index size() const noexcept { return values_.size(); }
  double operator[](Index j) const { return values_[j]; }

  DiscretizedFunction& operator+=(const DiscretizedFunction& rhs);
  DiscretizedFunction& operator-=(const DiscretizedFunction& rhs);
  DiscretizedFunction& operator*=(double a);

 private:
  GridPtr grid_;
  Vector values_;
};

DiscretizedFunction operator+(DiscretizedFunction lhs, const DiscretizedFunction& rhs);
DiscretizedFunction operator-(DiscretizedFunction lhs, const DiscretizedFunction& rhs);
DiscretizedFunction operator*(double a, DiscretizedFunction f);

/// Symmetric discretization of a bivariate kernel K(s,t) on a grid. The
/// input is replaced by (K + K^T)/2 on construction.
class KernelMatrix {
 public:
  KernelMatrix(GridPtr grid, Matrix values);

  const GridPtr& grid() const noexcept { return grid_; }
  const Matrix& values() const noexcept { return values_; }

  /// Kernel integral operator applied to grid values: out_j = sum_k w_k K_jk f_k.
  Vector apply(const Eigen::Ref<const Vector>& f) const;

 private:
  GridPtr grid_;
  Matrix values_;
};

void check_same_grid(const Grid& a, const Grid& b);

/// Quadrature approximation of the L2 inner product.
double inner_product(const DiscretizedFunction& f, const DiscretizedFunction& g);

/// L2 norm under the quadrature rule.
double norm(const DiscretizedFunction& f);

DiscretizedFunction apply_kernel(const KernelMatrix& K, const DiscretizedFunction& f);

/// sqrt(2) cos(k pi t) sampled on a grid over [0, 1].
DiscretizedFunction cosine_basis(int k, const GridPtr& grid);

/// Row-wise quadrature integrals: out_i = sum_j w_j X_ij f_j, i.e. the
/// scores <x_i, f> for curves stored as rows of X.
template <typename Derived>
Vector curve_scores(const Eigen::MatrixBase<Derived>& X, const Grid& grid,
                    const Eigen::Ref<const Vector>& f) {
  return X * grid.weights().cwiseProduct(f);
}

}  // namespace rapls
