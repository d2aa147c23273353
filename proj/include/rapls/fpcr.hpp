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

/// Leading eigenpairs of the sample covariance operator of a set of curves.
struct EigenSystem {
  Vector eigenvalues;                              // descending
  std::vector<DiscretizedFunction> eigenfunctions;  // quadrature-orthonormal
  Vector mean;                                     // mean curve removed before the decomposition
  int rank = 0;                                    // numerical rank of the covariance

  int size() const noexcept { return static_cast<int>(eigenfunctions.size()); }
};

/// Eigenvalues at or below this fraction of the largest count as zero.
inline constexpr double kRankTolerance = 1e-10;

/// Leading n_comp eigenpairs of n^{-1} Xc^T Xc acting through the quadrature
/// weights (Xc the column-centered X). Works on the n x n dual Gram matrix
/// when n < G. Each eigenfunction's first coordinate exceeding 1e-6 of its
/// largest magnitude is made positive. Throws rank-deficient when n_comp
/// exceeds the numerical rank.
EigenSystem fpca(const Matrix& X, const GridPtr& grid, int n_comp);

/// Scores <x_i - mean, e_j> of each curve on the first p eigenfunctions.
Matrix pc_scores(const Matrix& X, const GridPtr& grid, const EigenSystem& es, int p);

/// GLM of y on [1, Z, first p PC scores]; b = sum_j coef_j e_j.
RaplsFit fit_fpcr(const Dataset& d, ExpFamily fam, int p);
/// Same, reusing a decomposition of d.X with at least p components.
RaplsFit fit_fpcr(const Dataset& d, ExpFamily fam, const EigenSystem& es, int p);

}  // namespace rapls
