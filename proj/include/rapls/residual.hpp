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

#include <Eigen/QR>

#include <concepts>

#include "rapls/funcore.hpp"

namespace rapls {

/// The projection v -> v - Z (Z^T Z)^{-1} Z^T v onto the orthogonal
/// complement of the columns of Z. Z is used as given (no centering); a
/// column of ones turns the map into centering. Backed by a thin Householder
/// QR of Z, whose R factor is the Cholesky factor of Z^T Z.
class Annihilator {
 public:
  static constexpr double kMaxCondition = 1e12;

  /// Throws collinear-covariates if cond(Z^T Z) >= kMaxCondition.
  explicit Annihilator(Matrix Z);

  Index n() const noexcept { return Z_.rows(); }
  Index q() const noexcept { return Z_.cols(); }
  const Matrix& Z() const noexcept { return Z_; }

  /// Condition estimate of Z^T Z (1 when q = 0).
  double condition() const noexcept { return condition_; }

  /// (Z^T Z)^{-1} Z^T v.
  Vector coefficients(const Eigen::Ref<const Vector>& v) const;
  Matrix coefficients_columns(const Eigen::Ref<const Matrix>& V) const;

  Vector apply(const Eigen::Ref<const Vector>& v) const;
  /// Applies the annihilator to every column of V.
  Matrix apply_columns(const Eigen::Ref<const Matrix>& V) const;

 private:
  Matrix Z_;
  Eigen::HouseholderQR<Matrix> qr_;
  double condition_ = 1.0;
};

Annihilator build_annihilator(const Matrix& Z);

/// n^{-1} (M_Z X)^T (M_Z X) as a kernel on `grid`. Rows of X are curves.
KernelMatrix residual_cov(const Matrix& X, const Annihilator& A, const GridPtr& grid);

/// Anything that acts as a self-adjoint integral operator on grid values.
template <typename Op>
concept KernelOperator = requires(const Op& op, const Vector& f) {
  { op.grid() } -> std::convertible_to<const GridPtr&>;
  { op.apply(f) } -> std::convertible_to<Vector>;
};

/// The residual covariance operator held in factored form: the residualized
/// curves R = M_Z X (n x G). apply() costs O(nG) and never forms the G x G
/// kernel, which matters when the operator changes every IRLS iteration.
class ResidualCovariance {
 public:
  ResidualCovariance(GridPtr grid, Matrix residual_curves);

  const GridPtr& grid() const noexcept { return grid_; }
  const Matrix& residual_curves() const noexcept { return R_; }
  Index n() const noexcept { return R_.rows(); }

  Vector apply(const Eigen::Ref<const Vector>& f) const;
  KernelMatrix to_kernel() const;

 private:
  GridPtr grid_;
  Matrix R_;
};

static_assert(KernelOperator<KernelMatrix>);
static_assert(KernelOperator<ResidualCovariance>);

}  // namespace rapls
