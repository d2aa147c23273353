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

#include <vector>

#include "rapls/raplscore.hpp"

namespace rapls {

/// Projection of each scalar covariate onto the curves, theta_k(s), in the
/// span of the first s_n cosine functions.
struct ThetaEstimate {
  std::vector<DiscretizedFunction> theta;  // one per covariate
  int s_n = 0;
  Matrix coeffs;  // q x s_n
};

struct CalibratedFit {
  Vector alpha_cal;
  Matrix sigma_zeta;  // q x q
  Vector std_errors;
  Matrix zeta;  // n x q
};

/// ceil(2 n^{1/4}).
int default_s_n(Index n);

/// Weighted least squares of each z_k on the cosine scores U_ij = <x_i, phi_j>,
/// j <= s_n, with the information weights at the fitted predictor. Uses the
/// dataset as given (no centering). Throws ill-conditioned-calibration when
/// cond(U^T W U) >= 1e12.
ThetaEstimate estimate_theta(const Dataset& d, const RaplsFit& fit, ExpFamily fam, int s_n);

/// zeta_ik = z_ik - <x_i, theta_k>.
Matrix zeta_residuals(const Dataset& d, const ThetaEstimate& th);

/// Maximizes sum_i log p(y_i, offset_i + zeta_i^T a) over a, with
/// offset_i = alpha0 + <x_i, b + theta^T alpha> from the fit. Standard
/// errors are sqrt(diag(Sigma_zeta^{-1}) / n) with
/// Sigma_zeta = n^{-1} sum_i w_i zeta_i zeta_i^T.
CalibratedFit calibrated_alpha(const Dataset& d, ExpFamily fam, const RaplsFit& fit, const ThetaEstimate& th);

/// Full calibration of a converged fit on column-centered curves and
/// covariates. s_n = 0 selects default_s_n(n).
CalibratedFit calibrate(const Dataset& d, ExpFamily fam, const RaplsFit& fit, int s_n = 0);

}  // namespace rapls
