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

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "rapls/expfam.hpp"
#include "rapls/residual.hpp"

namespace rapls {

/// Outcome y, curves X (n x G, one row per subject), scalar covariates Z.
struct Dataset {
  Vector y;
  Matrix X;
  Matrix Z;
  GridPtr grid;

  Index n() const noexcept { return y.size(); }
  Index q() const noexcept { return Z.cols(); }
  Index G() const noexcept { return X.cols(); }

  /// Throws invalid-argument on inconsistent dimensions or non-finite data.
  void validate() const;
};

/// Column-centered copy of a dataset plus the centering constants.
struct CenteredDataset {
  Dataset data;
  double y_mean = 0.0;
  Vector x_mean;  // mean curve on the grid
  Vector z_mean;
};

CenteredDataset center(const Dataset& d);

/// eta_i = alpha0 + z_i^T alpha + <x_i, b> on the dataset's own scale.
Vector linear_predictor(const Dataset& d, double alpha0, const Eigen::Ref<const Vector>& alpha,
                        const DiscretizedFunction& b);

/// Which beta index to use in the Gram system. `population` takes
/// beta_j = <v, C^{j-1} v>, which makes H gamma = beta the normal equations of
/// least squares on the Krylov scores; `literal` takes beta_j = <v, C^j v>.
enum class BetaVariant { population, literal };

/// `moments` solves in the raw Krylov basis v, Cv, ..., C^{p-1}v through the
/// Hankel moment matrix. `lanczos` spans the same space with a quadrature-
/// orthonormal basis, so the guard only fires on genuine Krylov breakdown.
enum class KrylovRoute { moments, lanczos };

std::string_view to_string(BetaVariant v);
std::string_view to_string(KrylovRoute r);
BetaVariant parse_beta_variant(std::string_view name);
KrylovRoute parse_krylov_route(std::string_view name);

struct FitOptions {
  BetaVariant beta_variant = BetaVariant::population;
  KrylovRoute route = KrylovRoute::moments;
};

struct RaplsBasis {
  std::vector<DiscretizedFunction> functions;
  bool orthonormal = false;  // true for the lanczos route

  int p() const noexcept { return static_cast<int>(functions.size()); }
  const DiscretizedFunction& seed() const { return functions.front(); }
  /// sum_j coef_j * functions[j]
  DiscretizedFunction combine(const Eigen::Ref<const Vector>& coef) const;
};

struct GramSystem {
  Matrix H;
  Vector beta;
  /// mu_m = <v, C^m v>, m = 0..2p-1 (empty for the lanczos route).
  Vector moments;
  /// max |<psi_{j+1}, psi_k> - H_jk| / max|H| from direct inner products;
  /// NaN when not applicable.
  double hankel_deviation = std::numeric_limits<double>::quiet_NaN();
};

/// Guard on the Gram condition estimate.
inline constexpr double kGramMaxCondition = 1e10;

/// v(s) = n^{-1} X(s)^T M_Z target.
DiscretizedFunction seed_direction(const Dataset& d, const Annihilator& A,
                                   const Eigen::Ref<const Vector>& target);

/// psi_1 = v, psi_{j+1} = C psi_j. Throws degenerate-seed when ||v|| < 1e-14.
template <KernelOperator Op>
RaplsBasis krylov_basis(const Op& C, const DiscretizedFunction& v, int p) {
  detail::require(p >= 1, "krylov_basis: p must be positive");
  check_same_grid(*C.grid(), *v.grid());
  if (!(norm(v) >= 1e-14))
    detail::fail(ErrorKind::degenerate_seed, "seed direction has norm below 1e-14");
  RaplsBasis basis;
  basis.functions.reserve(static_cast<std::size_t>(p));
  basis.functions.push_back(v);
  for (int j = 1; j < p; ++j)
    basis.functions.emplace_back(v.grid(), C.apply(basis.functions.back().values()));
  return basis;
}

/// H_jk = <v, C^{j+k-1} v>, beta from the chosen variant, all from the 2p
/// moments. Applies C once more to the last basis function.
template <KernelOperator Op>
GramSystem gram_system(const RaplsBasis& basis, const Op& C,
                       BetaVariant variant = BetaVariant::population) {
  const int p = basis.p();
  detail::require(p >= 1, "gram_system: empty basis");
  check_same_grid(*C.grid(), *basis.seed().grid());
  const Vector& w = C.grid()->weights();

  // powers[a] = C^a v for a = 0..p
  std::vector<const Vector*> powers;
  for (const auto& f : basis.functions) powers.push_back(&f.values());
  const Vector last = C.apply(basis.functions.back().values());
  powers.push_back(&last);

  GramSystem g;
  g.moments.resize(2 * p);
  for (int m = 0; m < 2 * p; ++m) {
    const int a = std::min(m, p);
    const int b = m - a;
    g.moments[m] = (w.array() * powers[a]->array() * powers[b]->array()).sum();
  }
  g.H.resize(p, p);
  g.beta.resize(p);
  for (int j = 0; j < p; ++j) {
    for (int k = 0; k < p; ++k) g.H(j, k) = g.moments[j + k + 1];
    g.beta[j] = variant == BetaVariant::population ? g.moments[j] : g.moments[j + 1];
  }

  double dev = 0.0;
  for (int j = 0; j < p; ++j)
    for (int k = 0; k < p; ++k) {
      const double direct = (w.array() * powers[j + 1]->array() * powers[k]->array()).sum();
      dev = std::max(dev, std::abs(direct - g.H(j, k)));
    }
  const double scale = g.H.cwiseAbs().maxCoeff();
  g.hankel_deviation = scale > 0.0 ? dev / scale : dev;
  return g;
}

/// Quadrature-orthonormal basis of span{v, Cv, ..., C^{p-1} v} built by
/// Lanczos with full reorthogonalization. Throws ill-conditioned-gram on
/// breakdown, carrying the attained dimension.
template <KernelOperator Op>
RaplsBasis lanczos_basis(const Op& C, const DiscretizedFunction& v, int p) {
  detail::require(p >= 1, "lanczos_basis: p must be positive");
  check_same_grid(*C.grid(), *v.grid());
  const double vnorm = norm(v);
  if (!(vnorm >= 1e-14)) detail::fail(ErrorKind::degenerate_seed, "seed direction has norm below 1e-14");
  const Vector& w = C.grid()->weights();
  RaplsBasis basis;
  basis.orthonormal = true;
  basis.functions.emplace_back(v.grid(), v.values() / vnorm);
  for (int j = 1; j < p; ++j) {
    Vector u = C.apply(basis.functions.back().values());
    const double before = std::sqrt((w.array() * u.array().square()).sum());
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& qf : basis.functions)
        u -= (w.array() * qf.values().array() * u.array()).sum() * qf.values();
    const double after = std::sqrt((w.array() * u.array().square()).sum());
    if (!(after > 1e-10 * before) || !(after > 0.0))
      throw IllConditionedGram(p, j, std::numeric_limits<double>::infinity());
    basis.functions.emplace_back(v.grid(), u / after);
  }
  return basis;
}

/// H_jk = <q_j, C q_k>, beta_j = <q_j, v> for an orthonormal basis.
template <KernelOperator Op>
GramSystem projected_system(const RaplsBasis& basis, const Op& C, const DiscretizedFunction& v) {
  const int p = basis.p();
  detail::require(p >= 1, "projected_system: empty basis");
  const Vector& w = C.grid()->weights();
  Matrix Q(w.size(), p);
  for (int j = 0; j < p; ++j) Q.col(j) = basis.functions[j].values();
  Matrix CQ(w.size(), p);
  for (int j = 0; j < p; ++j) CQ.col(j) = C.apply(Q.col(j));
  GramSystem g;
  const Matrix H = Q.transpose() * w.asDiagonal() * CQ;
  g.H = 0.5 * (H + H.transpose());
  g.beta = Q.transpose() * w.cwiseProduct(v.values());
  return g;
}

/// Condition estimate max|lambda| / min lambda of a symmetric matrix
/// (infinite when not positive definite).
double gram_condition(const Matrix& H);

/// Solves H gamma = beta by LDL^T. Throws ill-conditioned-gram (with the
/// largest usable leading order) when cond(H) >= kGramMaxCondition, and
/// degenerate-system when no leading block is usable.
Vector solve_coefficients(const GramSystem& g);

/// Diagnostics recorded alongside every fit.
struct FitDiagnostics {
  double gram_condition = std::numeric_limits<double>::quiet_NaN();
  double hankel_deviation = std::numeric_limits<double>::quiet_NaN();
  /// ||Z^T M_Z v|| / (||Z|| ||v||) for the last residualized target.
  double annihilator_residual = 0.0;
  /// Poisson eta crossed the overflow guard at some point.
  bool eta_overflow = false;
  /// Gaussian dispersion RSS/n (NaN for other families).
  double sigma2 = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> loglik_trace;
};

/// Result of any component fit (RAPLS or FPCR). The coefficient function is
/// sum_j gamma_j basis_j; alpha0 and alpha are on the original data scale.
struct RaplsFit {
  std::string method = "rapls";
  ExpFamily family = ExpFamily::gaussian;
  int p = 0;
  Vector gamma;
  RaplsBasis basis;
  DiscretizedFunction b_hat;
  double alpha0 = 0.0;
  Vector alpha;
  int n_iter = 0;
  bool converged = false;
  double loglik = 0.0;
  double aic = 0.0;
  Vector eta;  // fitted linear predictor
  FitDiagnostics diagnostics;
};

/// Output of one linear Krylov step on prepared residualized data.
struct KrylovStep {
  RaplsBasis basis;
  GramSystem system;
  Vector gamma;
  DiscretizedFunction b;
  double condition;
};

KrylovStep krylov_step(const ResidualCovariance& C, const DiscretizedFunction& v, int p,
                       const FitOptions& opts);

/// Residualized linear problem shared by the PFLM fit and the IRLS loop:
/// centered data, the annihilator of the centered Z, and the residual
/// covariance operator of the centered curves.
class LinearContext {
 public:
  explicit LinearContext(const Dataset& d);

  const CenteredDataset& centered() const noexcept { return centered_; }
  const Annihilator& annihilator() const noexcept { return annihilator_; }
  const ResidualCovariance& covariance() const noexcept { return covariance_; }
  const GridPtr& grid() const noexcept { return centered_.data.grid; }

  /// Seed n^{-1} (M_Z X)^T M_Z (t - mean t); throws degenerate-seed when
  /// the residualized target or its cross-covariance vanishes.
  DiscretizedFunction seed(const Eigen::Ref<const Vector>& target, double* annihilator_residual) const;

  /// Scores <x_i - xbar, b>.
  Vector scores(const DiscretizedFunction& b) const;

  /// Least-squares (a, alpha) for y ~ a + Zc alpha + offset with Zc the
  /// centered covariates.
  std::pair<double, Vector> scalar_least_squares(const Eigen::Ref<const Vector>& y,
                                                 const Eigen::Ref<const Vector>& offset) const;

  /// Converts the centered-scale intercept to the original scale.
  double original_intercept(double a, const Eigen::Ref<const Vector>& alpha,
                            const DiscretizedFunction& b) const;

 private:
  CenteredDataset centered_;
  Annihilator annihilator_;
  ResidualCovariance covariance_;
};

/// Gaussian profile log-likelihood -n/2 (log(2 pi RSS/n) + 1).
double gaussian_profile_loglik(double rss, Index n);

/// RAPLS fit of the partially functional linear model with p components.
RaplsFit fit_pflm(const Dataset& d, int p, const FitOptions& opts = {});

}  // namespace rapls
