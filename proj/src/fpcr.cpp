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

#include "rapls/fpcr.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

#include "rapls/irls.hpp"

namespace rapls {

namespace {

void fix_sign(Vector& e) {
  const double cut = 1e-6 * e.cwiseAbs().maxCoeff();
  for (Index k = 0; k < e.size(); ++k) {
    if (std::abs(e[k]) > cut) {
      if (e[k] < 0.0) e = -e;
      return;
    }
  }
}

}  // namespace

EigenSystem fpca(const Matrix& X, const GridPtr& grid, int n_comp) {
  const Index n = X.rows();
  const Index g = grid->size();
  detail::require(X.cols() == g, "fpca: X columns must match the grid");
  detail::require(n >= 1, "fpca: no curves");
  detail::require(n_comp >= 1 && n_comp <= std::min(n, g), "fpca: n_comp must lie in [1, min(n, G)]");
  detail::require(X.allFinite(), "fpca: curves must be finite");
  const Vector& w = grid->weights();
  detail::require((w.array() > 0.0).all(), "fpca: quadrature weights must be positive");

  EigenSystem out;
  out.mean = X.colwise().mean().transpose();
  const Vector sw = w.cwiseSqrt();
  // B = Xc W^{1/2}; the operator's eigenproblem is n^{-1} B^T B u = lambda u, e = W^{-1/2} u.
  const Matrix B = (X.rowwise() - out.mean.transpose()) * sw.asDiagonal();
  const double nd = static_cast<double>(n);

  Vector lambda;  // descending
  Matrix U;       // G x m, orthonormal columns
  if (n < g) {
    Matrix gram = Matrix::Zero(n, n);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(B, 1.0 / nd);
    gram = gram.selfadjointView<Eigen::Lower>();
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
    lambda = es.eigenvalues().reverse();
    const Matrix A = es.eigenvectors().rowwise().reverse();
    U.resize(g, n);
    for (Index j = 0; j < n; ++j)
      U.col(j) = lambda[j] > 0.0 ? Vector(B.transpose() * A.col(j) / std::sqrt(nd * lambda[j])) : Vector::Zero(g);
  } else {
    Matrix cov = Matrix::Zero(g, g);
    cov.selfadjointView<Eigen::Lower>().rankUpdate(B.transpose(), 1.0 / nd);
    cov = cov.selfadjointView<Eigen::Lower>();
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    lambda = es.eigenvalues().reverse();
    U = es.eigenvectors().rowwise().reverse();
  }

  const double lmax = lambda.size() > 0 ? lambda[0] : 0.0;
  int rank = 0;
  if (lmax > 0.0)
    while (rank < lambda.size() && lambda[rank] > kRankTolerance * lmax) ++rank;
  out.rank = rank;
  if (n_comp > rank) throw RankDeficient(n_comp, rank);

  out.eigenvalues = lambda.head(n_comp);
  for (int j = 0; j < n_comp; ++j) {
    Vector e = U.col(j).cwiseQuotient(sw);
    fix_sign(e);
    out.eigenfunctions.emplace_back(grid, std::move(e));
  }
  return out;
}

Matrix pc_scores(const Matrix& X, const GridPtr& grid, const EigenSystem& es, int p) {
  detail::require(p >= 0 && p <= es.size(), "pc_scores: p exceeds the available components");
  detail::require(X.cols() == grid->size(), "pc_scores: X columns must match the grid");
  Matrix E(grid->size(), p);
  for (int j = 0; j < p; ++j) {
    check_same_grid(*grid, *es.eigenfunctions[j].grid());
    E.col(j) = grid->weights().cwiseProduct(es.eigenfunctions[j].values());
  }
  return (X.rowwise() - es.mean.transpose()) * E;
}

RaplsFit fit_fpcr(const Dataset& d, ExpFamily fam, int p) {
  d.validate();
  return fit_fpcr(d, fam, fpca(d.X, d.grid, p), p);
}

RaplsFit fit_fpcr(const Dataset& d, ExpFamily fam, const EigenSystem& es, int p) {
  d.validate();
  check_outcomes(fam, d.y);
  detail::require(p >= 1 && p <= es.size(), "fit_fpcr: p must lie in [1, available components]");
  const Index n = d.n();
  const Index q = d.q();
  detail::require(n > q + p + 1, "fit_fpcr: need n > p + q + 1");

  const Vector z_mean = q > 0 ? Vector(d.Z.colwise().mean().transpose()) : Vector(0);
  Matrix D(n, 1 + q + p);
  D.col(0).setOnes();
  if (q > 0) D.middleCols(1, q) = d.Z.rowwise() - z_mean.transpose();
  D.rightCols(p) = pc_scores(d.X, d.grid, es, p);

  Vector start = Vector::Zero(D.cols());
  start[0] = canonical_link(fam, d.y.mean());
  const GlmSolution sol = glm_newton(D, d.y, fam, Vector::Zero(n), start);

  RaplsBasis basis;
  basis.orthonormal = true;
  basis.functions.assign(es.eigenfunctions.begin(), es.eigenfunctions.begin() + p);
  Vector gamma = sol.coef.tail(p);
  DiscretizedFunction b = basis.combine(gamma);
  Vector alpha = sol.coef.segment(1, q);
  double alpha0 = sol.coef[0] - (d.grid->weights().array() * es.mean.array() * b.values().array()).sum();
  if (q > 0) alpha0 -= z_mean.dot(alpha);

  Vector eta = D * sol.coef;
  FitDiagnostics diag;
  for (Index i = 0; i < n; ++i) diag.eta_overflow = diag.eta_overflow || eta_overflows(fam, eta[i]);
  if (fam == ExpFamily::gaussian) diag.sigma2 = (d.y - eta).squaredNorm() / static_cast<double>(n);
  const double ll = fitted_loglik(fam, d.y, eta);
  diag.loglik_trace.push_back(ll);
  const int df = p + static_cast<int>(q) + (fam == ExpFamily::gaussian ? 2 : 1);

  return RaplsFit{.method = "fpcr",
                  .family = fam,
                  .p = p,
                  .gamma = std::move(gamma),
                  .basis = std::move(basis),
                  .b_hat = std::move(b),
                  .alpha0 = alpha0,
                  .alpha = std::move(alpha),
                  .n_iter = sol.steps,
                  .converged = true,
                  .loglik = ll,
                  .aic = -2.0 * ll + 2.0 * static_cast<double>(df),
                  .eta = std::move(eta),
                  .diagnostics = std::move(diag)};
}

}  // namespace rapls
