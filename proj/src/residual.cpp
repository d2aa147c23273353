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

#include "rapls/residual.hpp"

#include <Eigen/SVD>

#include <limits>

namespace rapls {

Annihilator::Annihilator(Matrix Z) : Z_(std::move(Z)) {
  detail::require(Z_.allFinite(), "covariates must be finite");
  detail::require(Z_.rows() > Z_.cols(), "annihilator needs n > q");
  if (Z_.cols() == 0) return;
  qr_.compute(Z_);
  const Matrix R = qr_.matrixQR().topRows(Z_.cols()).triangularView<Eigen::Upper>();
  const Vector sv = Eigen::JacobiSVD<Matrix>(R).singularValues();
  const double smin = sv[sv.size() - 1];
  condition_ = smin > 0.0 ? (sv[0] / smin) * (sv[0] / smin) : std::numeric_limits<double>::infinity();
  if (!(condition_ < kMaxCondition))
    detail::fail(ErrorKind::collinear_covariates,
                 "condition estimate of Z^T Z is " + std::to_string(condition_));
}

Vector Annihilator::coefficients(const Eigen::Ref<const Vector>& v) const {
  detail::require(v.size() == n(), "annihilator: vector length mismatch");
  if (q() == 0) return Vector(0);
  return qr_.solve(v);
}

Matrix Annihilator::coefficients_columns(const Eigen::Ref<const Matrix>& V) const {
  detail::require(V.rows() == n(), "annihilator: matrix row mismatch");
  if (q() == 0) return Matrix(0, V.cols());
  return qr_.solve(V);
}

Vector Annihilator::apply(const Eigen::Ref<const Vector>& v) const {
  if (q() == 0) {
    detail::require(v.size() == n(), "annihilator: vector length mismatch");
    return v;
  }
  return v - Z_ * coefficients(v);
}

Matrix Annihilator::apply_columns(const Eigen::Ref<const Matrix>& V) const {
  if (q() == 0) {
    detail::require(V.rows() == n(), "annihilator: matrix row mismatch");
    return V;
  }
  return V - Z_ * coefficients_columns(V);
}

Annihilator build_annihilator(const Matrix& Z) { return Annihilator(Z); }

namespace {
Matrix gram_over_n(const Matrix& R) {
  const Index g = R.cols();
  Matrix C = Matrix::Zero(g, g);
  C.selfadjointView<Eigen::Lower>().rankUpdate(R.transpose(), 1.0 / static_cast<double>(R.rows()));
  C.triangularView<Eigen::StrictlyUpper>() = C.transpose();
  return C;
}
}  // namespace

KernelMatrix residual_cov(const Matrix& X, const Annihilator& A, const GridPtr& grid) {
  detail::require(grid != nullptr, "residual_cov: grid required");
  detail::require(X.rows() == A.n(), "residual_cov: X and Z disagree on n");
  detail::require(X.cols() == grid->size(), "residual_cov: X columns must match the grid");
  return KernelMatrix(grid, gram_over_n(A.apply_columns(X)));
}

ResidualCovariance::ResidualCovariance(GridPtr grid, Matrix residual_curves)
    : grid_(std::move(grid)), R_(std::move(residual_curves)) {
  detail::require(grid_ != nullptr, "residual covariance: grid required");
  detail::require(R_.cols() == grid_->size(), "residual covariance: columns must match the grid");
  detail::require(R_.rows() >= 1, "residual covariance: need at least one curve");
}

Vector ResidualCovariance::apply(const Eigen::Ref<const Vector>& f) const {
  detail::require(f.size() == grid_->size(), "residual covariance: function length mismatch");
  const Vector scores = R_ * grid_->weights().cwiseProduct(f);
  return R_.transpose() * scores / static_cast<double>(R_.rows());
}

KernelMatrix ResidualCovariance::to_kernel() const { return KernelMatrix(grid_, gram_over_n(R_)); }

}  // namespace rapls
