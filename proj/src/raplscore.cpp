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

#include "rapls/raplscore.hpp"

#include <Eigen/Cholesky>

#include <numbers>
#include <string>

namespace rapls {

void Dataset::validate() const {
  detail::require(grid != nullptr, "dataset: grid required");
  detail::require(X.rows() == y.size(), "dataset: X must have one row per outcome");
  detail::require(X.cols() == grid->size(), "dataset: X columns must match the grid");
  detail::require(Z.rows() == y.size(), "dataset: Z must have one row per outcome");
  detail::require(y.size() > Z.cols(), "dataset: need n > q");
  detail::require(y.allFinite() && X.allFinite() && Z.allFinite(), "dataset: entries must be finite");
}

CenteredDataset center(const Dataset& d) {
  d.validate();
  CenteredDataset c;
  c.y_mean = d.y.mean();
  c.x_mean = d.X.colwise().mean().transpose();
  c.z_mean = d.q() > 0 ? Vector(d.Z.colwise().mean().transpose()) : Vector(0);
  c.data.grid = d.grid;
  c.data.y = d.y.array() - c.y_mean;
  c.data.X = d.X.rowwise() - c.x_mean.transpose();
  c.data.Z = d.q() > 0 ? Matrix(d.Z.rowwise() - c.z_mean.transpose()) : Matrix(d.n(), 0);
  return c;
}

Vector linear_predictor(const Dataset& d, double alpha0, const Eigen::Ref<const Vector>& alpha,
                        const DiscretizedFunction& b) {
  check_same_grid(*d.grid, *b.grid());
  detail::require(alpha.size() == d.q(), "linear_predictor: alpha length must equal q");
  Vector eta = curve_scores(d.X, *d.grid, b.values());
  eta.array() += alpha0;
  if (d.q() > 0) eta += d.Z * alpha;
  return eta;
}

std::string_view to_string(BetaVariant v) { return v == BetaVariant::population ? "population" : "literal"; }
std::string_view to_string(KrylovRoute r) { return r == KrylovRoute::moments ? "moments" : "lanczos"; }

BetaVariant parse_beta_variant(std::string_view name) {
  if (name == "population") return BetaVariant::population;
  if (name == "literal") return BetaVariant::literal;
  detail::fail(ErrorKind::invalid_argument, "unknown beta variant '" + std::string(name) + "'");
}

KrylovRoute parse_krylov_route(std::string_view name) {
  if (name == "moments") return KrylovRoute::moments;
  if (name == "lanczos") return KrylovRoute::lanczos;
  detail::fail(ErrorKind::invalid_argument, "unknown krylov route '" + std::string(name) + "'");
}

DiscretizedFunction RaplsBasis::combine(const Eigen::Ref<const Vector>& coef) const {
  detail::require(coef.size() == p() && p() >= 1, "RaplsBasis::combine: coefficient length mismatch");
  Vector out = Vector::Zero(seed().size());
  for (int j = 0; j < p(); ++j) out += coef[j] * functions[j].values();
  return DiscretizedFunction(seed().grid(), std::move(out));
}

DiscretizedFunction seed_direction(const Dataset& d, const Annihilator& A,
                                   const Eigen::Ref<const Vector>& target) {
  detail::require(target.size() == d.n(), "seed_direction: target length must equal n");
  detail::require(A.n() == d.n(), "seed_direction: annihilator built for a different n");
  detail::require(d.X.cols() == d.grid->size(), "seed_direction: X columns must match the grid");
  Vector v = d.X.transpose() * A.apply(target) / static_cast<double>(d.n());
  return DiscretizedFunction(d.grid, std::move(v));
}

double gram_condition(const Matrix& H) {
  if (H.size() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  const double lmin = ev.minCoeff();
  const double lmax = ev.cwiseAbs().maxCoeff();
  if (!(lmin > 0.0)) return std::numeric_limits<double>::infinity();
  return lmax / lmin;
}

Vector solve_coefficients(const GramSystem& g) {
  const Index p = g.H.rows();
  detail::require(p >= 1 && g.H.cols() == p && g.beta.size() == p, "solve_coefficients: H must be p x p");
  detail::require(g.H.allFinite() && g.beta.allFinite(), "solve_coefficients: non-finite Gram system");
  const double scale = g.H.cwiseAbs().maxCoeff();
  detail::require((g.H - g.H.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * std::max(scale, 1e-300),
                  "solve_coefficients: H is not symmetric");

  const double cond = gram_condition(g.H);
  if (!(cond < kGramMaxCondition)) {
    int usable = 0;
    for (Index k = p - 1; k >= 1; --k) {
      if (gram_condition(g.H.topLeftCorner(k, k)) < kGramMaxCondition) {
        usable = static_cast<int>(k);
        break;
      }
    }
    if (usable == 0)
      detail::fail(ErrorKind::degenerate_system, "Gram system has no well-conditioned leading block");
    throw IllConditionedGram(static_cast<int>(p), usable, cond);
  }

  Eigen::LDLT<Matrix> ldlt(g.H);
  Vector gamma = ldlt.solve(g.beta);
  if (ldlt.info() != Eigen::Success || !gamma.allFinite() ||
      (g.H * gamma - g.beta).norm() > 1e-8 * g.beta.norm())
    detail::fail(ErrorKind::degenerate_system, "LDL^T solve of the Gram system failed");
  return gamma;
}

KrylovStep krylov_step(const ResidualCovariance& C, const DiscretizedFunction& v, int p,
                       const FitOptions& opts) {
  if (opts.route == KrylovRoute::moments) {
    RaplsBasis basis = krylov_basis(C, v, p);
    GramSystem sys = gram_system(basis, C, opts.beta_variant);
    Vector gamma = solve_coefficients(sys);
    if (opts.beta_variant == BetaVariant::population) {
      // One refinement step, with the residual of the normal equations
      // formed through C instead of through the (ill-conditioned) moments.
      const Vector& w = C.grid()->weights();
      const Vector Cb = C.apply(basis.combine(gamma).values());
      Vector r(p);
      for (int j = 0; j < p; ++j)
        r[j] = sys.beta[j] - (w.array() * basis.functions[j].values().array() * Cb.array()).sum();
      gamma += Eigen::LDLT<Matrix>(sys.H).solve(r);
    }
    DiscretizedFunction b = basis.combine(gamma);
    const double cond = gram_condition(sys.H);
    return KrylovStep{std::move(basis), std::move(sys), std::move(gamma), std::move(b), cond};
  }
  // The literal beta index has no meaning in an orthonormal basis; the
  // lanczos route always solves the least-squares projection.
  RaplsBasis basis = lanczos_basis(C, v, p);
  GramSystem sys = projected_system(basis, C, v);
  Vector gamma = solve_coefficients(sys);
  DiscretizedFunction b = basis.combine(gamma);
  const double cond = gram_condition(sys.H);
  return KrylovStep{std::move(basis), std::move(sys), std::move(gamma), std::move(b), cond};
}

LinearContext::LinearContext(const Dataset& d)
    : centered_(center(d)),
      annihilator_(centered_.data.Z),
      covariance_(centered_.data.grid, annihilator_.apply_columns(centered_.data.X)) {}

DiscretizedFunction LinearContext::seed(const Eigen::Ref<const Vector>& target,
                                        double* annihilator_residual) const {
  const Index n = centered_.data.n();
  detail::require(target.size() == n, "seed: target length must equal n");
  const Vector tc = target.array() - target.mean();
  const Vector tr = annihilator_.apply(tc);
  if (annihilator_residual != nullptr) {
    const double denom = centered_.data.Z.norm() * tc.norm();
    *annihilator_residual =
        (annihilator_.q() == 0 || denom == 0.0) ? 0.0 : (centered_.data.Z.transpose() * tr).norm() / denom;
  }
  const Matrix& R = covariance_.residual_curves();
  const double nd = static_cast<double>(n);
  Vector v = R.transpose() * tr / nd;
  // Cauchy-Schwarz bound on ||v|| in the Euclidean grid norm.
  const double bound = tr.norm() / std::sqrt(nd) * R.norm() / std::sqrt(nd);
  if (!(tr.norm() > 1e-12 * target.norm()) || !(v.norm() > 1e-12 * bound))
    detail::fail(ErrorKind::degenerate_seed, "residualized outcome is uncorrelated with the curves");
  return DiscretizedFunction(grid(), std::move(v));
}

Vector LinearContext::scores(const DiscretizedFunction& b) const {
  return curve_scores(centered_.data.X, *grid(), b.values());
}

std::pair<double, Vector> LinearContext::scalar_least_squares(const Eigen::Ref<const Vector>& y,
                                                              const Eigen::Ref<const Vector>& offset) const {
  const Vector r = y - offset;
  Vector alpha = annihilator_.coefficients(r);
  Vector fitted = r;
  if (annihilator_.q() > 0) fitted -= centered_.data.Z * alpha;
  return {fitted.mean(), std::move(alpha)};
}

double LinearContext::original_intercept(double a, const Eigen::Ref<const Vector>& alpha,
                                         const DiscretizedFunction& b) const {
  const Grid& g = *grid();
  double a0 = a - (g.weights().array() * centered_.x_mean.array() * b.values().array()).sum();
  if (alpha.size() > 0) a0 -= centered_.z_mean.dot(alpha);
  return a0;
}

double gaussian_profile_loglik(double rss, Index n) {
  const double nd = static_cast<double>(n);
  return -0.5 * nd * (std::log(2.0 * std::numbers::pi * rss / nd) + 1.0);
}

RaplsFit fit_pflm(const Dataset& d, int p, const FitOptions& opts) {
  detail::require(p >= 1, "fit_pflm: p must be positive");
  d.validate();
  detail::require(d.n() > d.q() + 1, "fit_pflm: need n > q + 1");
  const LinearContext ctx(d);

  double ann_res = 0.0;
  const DiscretizedFunction v = ctx.seed(d.y, &ann_res);
  KrylovStep step = krylov_step(ctx.covariance(), v, p, opts);

  const Vector offset = ctx.scores(step.b);
  auto [a, alpha] = ctx.scalar_least_squares(d.y, offset);
  Vector eta = offset.array() + a;
  if (d.q() > 0) eta += ctx.centered().data.Z * alpha;
  const double rss = (d.y - eta).squaredNorm();
  const double ll = gaussian_profile_loglik(rss, d.n());

  FitDiagnostics diag;
  diag.gram_condition = step.condition;
  diag.hankel_deviation = step.system.hankel_deviation;
  diag.annihilator_residual = ann_res;
  diag.sigma2 = rss / static_cast<double>(d.n());
  diag.loglik_trace.push_back(ll);

  const double alpha0 = ctx.original_intercept(a, alpha, step.b);
  return RaplsFit{.method = "rapls",
                  .family = ExpFamily::gaussian,
                  .p = p,
                  .gamma = std::move(step.gamma),
                  .basis = std::move(step.basis),
                  .b_hat = std::move(step.b),
                  .alpha0 = alpha0,
                  .alpha = std::move(alpha),
                  .n_iter = 1,
                  .converged = true,
                  .loglik = ll,
                  .aic = -2.0 * ll + 2.0 * static_cast<double>(p + d.q() + 2),
                  .eta = std::move(eta),
                  .diagnostics = std::move(diag)};
}

}  // namespace rapls
