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

#include "rapls/calibrate.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>

#include "rapls/irls.hpp"

namespace rapls {

int default_s_n(Index n) {
  detail::require(n >= 1, "default_s_n: n must be positive");
  const double r = 2.0 * std::pow(static_cast<double>(n), 0.25);
  // Guard exact integers such as n = 256 against pow round-off.
  return static_cast<int>(std::ceil(r - 1e-9));
}

ThetaEstimate estimate_theta(const Dataset& d, const RaplsFit& fit, ExpFamily fam, int s_n) {
  d.validate();
  if (!fit.converged) detail::fail(ErrorKind::invalid_fit, "calibration needs a converged fit");
  detail::require(fit.eta.size() == d.n(), "estimate_theta: fit and dataset disagree on n");
  detail::require(d.q() >= 1, "estimate_theta: no scalar covariates to calibrate");
  detail::require(s_n >= 1, "estimate_theta: s_n must be positive");
  detail::require(2 * static_cast<Index>(s_n) <= d.n(), "estimate_theta: s_n must not exceed n/2");
  detail::require(4 * static_cast<Index>(s_n) <= d.G(), "estimate_theta: s_n must not exceed G/4");

  Matrix basis(d.G(), s_n);
  for (int j = 0; j < s_n; ++j) basis.col(j) = cosine_basis(j + 1, d.grid).values();
  const Matrix U = d.X * d.grid->weights().asDiagonal() * basis;  // n x s_n
  const Vector w = info_weights(fam, fit.eta);

  const Matrix UtWU = U.transpose() * w.asDiagonal() * U;
  const double cond = gram_condition(UtWU);
  if (!(cond < 1e12))
    detail::fail(ErrorKind::ill_conditioned_calibration,
                 "cosine-score normal matrix has condition " + std::to_string(cond) + "; reduce s_n");
  const Eigen::LDLT<Matrix> ldlt(UtWU);
  const Matrix coeffs = ldlt.solve(U.transpose() * w.asDiagonal() * d.Z).transpose();  // q x s_n

  ThetaEstimate th;
  th.s_n = s_n;
  th.coeffs = coeffs;
  for (Index k = 0; k < d.q(); ++k) th.theta.emplace_back(d.grid, basis * coeffs.row(k).transpose());
  return th;
}

Matrix zeta_residuals(const Dataset& d, const ThetaEstimate& th) {
  detail::require(static_cast<Index>(th.theta.size()) == d.q(), "zeta_residuals: one theta per covariate");
  Matrix zeta = d.Z;
  for (Index k = 0; k < d.q(); ++k) {
    check_same_grid(*d.grid, *th.theta[k].grid());
    zeta.col(k) -= curve_scores(d.X, *d.grid, th.theta[k].values());
  }
  return zeta;
}

CalibratedFit calibrated_alpha(const Dataset& d, ExpFamily fam, const RaplsFit& fit, const ThetaEstimate& th) {
  d.validate();
  if (!fit.converged) detail::fail(ErrorKind::invalid_fit, "calibration needs a converged fit");
  detail::require(fit.alpha.size() == d.q() && fit.eta.size() == d.n(),
                  "calibrated_alpha: fit and dataset disagree on dimensions");
  const Index n = d.n();
  const Index q = d.q();

  CalibratedFit out;
  out.zeta = zeta_residuals(d, th);
  const Vector w = info_weights(fam, fit.eta);
  out.sigma_zeta = out.zeta.transpose() * w.asDiagonal() * out.zeta / static_cast<double>(n);
  out.sigma_zeta = 0.5 * (out.sigma_zeta + out.sigma_zeta.transpose());

  // Degeneracy is judged against the weighted spread of the raw covariates,
  // so a single covariate absorbed by the curves is caught as well.
  const Matrix raw = d.Z.transpose() * w.asDiagonal() * d.Z / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> es(out.sigma_zeta, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Matrix> rs(raw, Eigen::EigenvaluesOnly);
  const double lmax = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), rs.eigenvalues().cwiseAbs().maxCoeff());
  if (!(es.eigenvalues().minCoeff() > 1e-12 * lmax) || !(lmax > 0.0))
    detail::fail(ErrorKind::degenerate_zeta, "calibrated covariates are (numerically) collinear");
  const Matrix inv = out.sigma_zeta.ldlt().solve(Matrix::Identity(q, q));
  out.std_errors = (inv.diagonal() / static_cast<double>(n)).cwiseSqrt();

  DiscretizedFunction shifted = fit.b_hat;
  for (Index k = 0; k < q; ++k) shifted += fit.alpha[k] * th.theta[k];
  Vector offset = curve_scores(d.X, *d.grid, shifted.values());
  offset.array() += fit.alpha0;

  try {
    out.alpha_cal = glm_newton(out.zeta, d.y, fam, offset, fit.alpha).coef;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::score_solve_failure || e.kind() == ErrorKind::collinear_covariates)
      detail::fail(ErrorKind::calibration_failure, e.what());
    throw;
  }
  return out;
}

CalibratedFit calibrate(const Dataset& d, ExpFamily fam, const RaplsFit& fit, int s_n) {
  const CenteredDataset c = center(d);
  Dataset cd = c.data;
  cd.y = d.y;
  RaplsFit cf = fit;
  cf.alpha0 = fit.alpha0 + c.z_mean.dot(fit.alpha) +
              (d.grid->weights().array() * c.x_mean.array() * fit.b_hat.values().array()).sum();
  const ThetaEstimate th = estimate_theta(cd, cf, fam, s_n == 0 ? default_s_n(d.n()) : s_n);
  return calibrated_alpha(cd, fam, cf, th);
}

}  // namespace rapls
