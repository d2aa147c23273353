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

#include "rapls/irls.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <mutex>
#include <limits>
#include <optional>
#include <tuple>
#include <string>
#include <vector>

#include "rapls/random.hpp"

namespace rapls {

std::string_view to_string(Residualization r) { return r == Residualization::weighted ? "weighted" : "unweighted"; }

Residualization parse_residualization(std::string_view name) {
  if (name == "weighted") return Residualization::weighted;
  if (name == "unweighted") return Residualization::unweighted;
  detail::fail(ErrorKind::invalid_argument, "unknown residualization '" + std::string(name) + "'");
}

std::string_view to_string(StepControl s) { return s == StepControl::none ? "none" : "halving"; }

StepControl parse_step_control(std::string_view name) {
  if (name == "none") return StepControl::none;
  if (name == "halving") return StepControl::halving;
  detail::fail(ErrorKind::invalid_argument, "unknown step control '" + std::string(name) + "'");
}

NonConvergence::NonConvergence(RaplsFit last)
    : Error(ErrorKind::non_convergence, "no convergence after " + std::to_string(last.n_iter) + " iterations"),
      last_(std::make_shared<const RaplsFit>(std::move(last))) {}

double fitted_loglik(ExpFamily fam, const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& eta) {
  if (fam == ExpFamily::gaussian) return gaussian_profile_loglik((y - eta).squaredNorm(), y.size());
  return total_loglik(fam, y, eta);
}

GlmSolution glm_newton(const Matrix& D, const Eigen::Ref<const Vector>& y, ExpFamily fam,
                       const Eigen::Ref<const Vector>& offset, const Eigen::Ref<const Vector>& start,
                       int max_steps) {
  const Index n = D.rows();
  detail::require(y.size() == n && offset.size() == n, "glm_newton: length mismatch");
  detail::require(start.size() == D.cols(), "glm_newton: start has the wrong length");
  detail::require(offset.allFinite(), "glm_newton: offsets must be finite");
  check_outcomes(fam, y);

  Vector coef = start;
  Vector eta = D * coef + offset;
  double ll = total_loglik(fam, y, eta);
  const double gtol = 1e-10 * static_cast<double>(n);

  for (int step = 0; step <= max_steps; ++step) {
    const Vector r = scores(fam, y, eta);
    const Vector grad = D.transpose() * r;
    if (grad.norm() <= gtol) return {std::move(coef), step, ll};
    if (step == max_steps) break;

    const Vector w = info_weights(fam, eta);
    const Matrix info = D.transpose() * w.asDiagonal() * D;
    if (gram_condition(info) >= 1e12)
      detail::fail(ErrorKind::collinear_covariates, "singular Fisher information in the score solve");
    const Vector delta = info.ldlt().solve(grad);

    double t = 1.0;
    Vector trial_coef;
    Vector trial_eta;
    double trial_ll = -std::numeric_limits<double>::infinity();
    for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
      trial_coef = coef + t * delta;
      trial_eta = D * trial_coef + offset;
      trial_ll = total_loglik(fam, y, trial_eta);
      if (std::isfinite(trial_ll) && trial_ll >= ll - 1e-12 * std::abs(ll)) break;
    }
    if (!std::isfinite(trial_ll))
      detail::fail(ErrorKind::score_solve_failure, "log-likelihood is not finite along the Newton direction");
    if (fam == ExpFamily::bernoulli && trial_eta.cwiseAbs().maxCoeff() > 30.0)
      detail::fail(ErrorKind::score_solve_failure,
                   "fitted probabilities numerically 0 or 1; outcomes look separated");

    const double moved = (trial_coef - coef).norm();
    coef = std::move(trial_coef);
    eta = std::move(trial_eta);
    ll = trial_ll;
    // Gradient tolerance below the rounding floor of the problem.
    if (moved <= 1e-14 * (1.0 + coef.norm())) return {std::move(coef), step + 1, ll};
  }
  detail::fail(ErrorKind::score_solve_failure,
               "Newton iterations did not converge within " + std::to_string(max_steps) + " steps");
}

namespace {

Matrix with_intercept(const Matrix& Z) {
  Matrix D(Z.rows(), Z.cols() + 1);
  D.col(0).setOnes();
  D.rightCols(Z.cols()) = Z;
  return D;
}

// Scalar GLM on the centered scale: y ~ a + Zc alpha + offset.
std::pair<double, Vector> centered_scalar_fit(const LinearContext& ctx, ExpFamily fam,
                                              const Eigen::Ref<const Vector>& y, const Vector& offset,
                                              double a_start, const Vector& alpha_start) {
  if (fam == ExpFamily::gaussian) return ctx.scalar_least_squares(y, offset);
  const Matrix D = with_intercept(ctx.centered().data.Z);
  Vector start(D.cols());
  start[0] = a_start;
  start.tail(alpha_start.size()) = alpha_start;
  const GlmSolution sol = glm_newton(D, y, fam, offset, start);
  return {sol.coef[0], sol.coef.tail(alpha_start.size())};
}

Vector centered_predictor(const LinearContext& ctx, double a, const Vector& alpha, const Vector& offset) {
  Vector eta = offset.array() + a;
  if (alpha.size() > 0) eta += ctx.centered().data.Z * alpha;
  return eta;
}

// Linear step on sqrt(w)-scaled data. The intercept column sqrt(w) joins
// the covariates so the annihilator also removes the weighted mean.
KrylovStep weighted_step(const LinearContext& ctx, const Vector& w, const Vector& ytilde, int p,
                         const FitOptions& opts, double* annihilator_residual) {
  const Dataset& c = ctx.centered().data;
  const Index n = c.n();
  const Vector sw = w.cwiseSqrt();
  Matrix Zw(n, c.q() + 1);
  Zw.col(0) = sw;
  if (c.q() > 0) Zw.rightCols(c.q()) = sw.asDiagonal() * c.Z;
  const Annihilator A(Zw);
  Matrix R = A.apply_columns(sw.asDiagonal() * c.X);
  const Vector target = sw.cwiseProduct(ytilde);
  const Vector tr = A.apply(target);
  const double denom = Zw.norm() * target.norm();
  *annihilator_residual = denom == 0.0 ? 0.0 : (Zw.transpose() * tr).norm() / denom;

  const double nd = static_cast<double>(n);
  Vector v = R.transpose() * tr / nd;
  const double bound = tr.norm() / std::sqrt(nd) * R.norm() / std::sqrt(nd);
  if (!(tr.norm() > 1e-12 * target.norm()) || !(v.norm() > 1e-12 * bound))
    detail::fail(ErrorKind::degenerate_seed, "weighted pseudo-response is uncorrelated with the curves");
  const ResidualCovariance C(c.grid, std::move(R));
  return krylov_step(C, DiscretizedFunction(c.grid, std::move(v)), p, opts);
}

struct SamplerCache {
  std::mutex mu;
  std::vector<std::pair<GridPtr, std::shared_ptr<const GaussianProcessSampler>>> entries;
};

std::shared_ptr<const GaussianProcessSampler> cached_sampler(const GridPtr& grid) {
  static SamplerCache cache;
  std::lock_guard lock(cache.mu);
  for (const auto& [g, s] : cache.entries)
    if (g->same_as(*grid)) return s;
  auto s = std::make_shared<const GaussianProcessSampler>(squared_exponential_sampler(grid, 10.0));
  if (cache.entries.size() >= 8) cache.entries.erase(cache.entries.begin());
  cache.entries.emplace_back(grid, s);
  return s;
}

}  // namespace

DiscretizedFunction random_initial_path(const GridPtr& grid, std::uint64_t seed) {
  RandomStream rng(seed);
  return cached_sampler(grid)->draw(rng);
}

std::pair<double, Vector> solve_alpha_score(const Dataset& d, ExpFamily fam, const DiscretizedFunction& b_fixed,
                                            double alpha0_start, const Eigen::Ref<const Vector>& alpha_start) {
  d.validate();
  check_same_grid(*d.grid, *b_fixed.grid());
  detail::require(alpha_start.size() == d.q(), "solve_alpha_score: alpha start must have length q");
  const Vector offset = curve_scores(d.X, *d.grid, b_fixed.values());
  const Matrix D = with_intercept(d.Z);
  Vector start(d.q() + 1);
  start[0] = alpha0_start;
  start.tail(d.q()) = alpha_start;
  const GlmSolution sol = glm_newton(D, d.y, fam, offset, start);
  return {sol.coef[0], sol.coef.tail(d.q())};
}

RaplsFit fit_gflm(const Dataset& d, ExpFamily fam, const FitConfig& cfg) {
  detail::require(cfg.p >= 1, "fit_gflm: p must be positive");
  detail::require(cfg.tol > 0.0, "fit_gflm: tol must be positive");
  detail::require(cfg.max_iter >= 1, "fit_gflm: max_iter must be at least 1");
  d.validate();
  check_outcomes(fam, d.y);
  detail::require(d.n() > d.q() + 1, "fit_gflm: need n > q + 1");

  const LinearContext ctx(d);
  const GridPtr& grid = ctx.grid();
  const bool gaussian = fam == ExpFamily::gaussian;
  const bool weighted = !gaussian && cfg.residualization == Residualization::weighted;
  const bool halving = !gaussian && cfg.step_control == StepControl::halving;

  // Starting values on the centered scale.
  DiscretizedFunction b = DiscretizedFunction::zero(grid);
  double a = 0.0;
  Vector alpha = Vector::Zero(d.q());
  if (const auto* e = std::get_if<ExplicitInit>(&cfg.init)) {
    check_same_grid(*grid, *e->b.grid());
    detail::require(e->alpha.size() == d.q(), "fit_gflm: explicit alpha must have length q");
    b = e->b;
    alpha = e->alpha;
    a = e->alpha0 + (grid->weights().array() * ctx.centered().x_mean.array() * b.values().array()).sum();
    if (d.q() > 0) a += ctx.centered().z_mean.dot(alpha);
  } else {
    if (const auto* r = std::get_if<RandomInit>(&cfg.init)) b = random_initial_path(grid, r->seed);
    const double ybar = d.y.mean();
    std::tie(a, alpha) =
        centered_scalar_fit(ctx, fam, d.y, ctx.scores(b), canonical_link(fam, ybar), Vector::Zero(d.q()));
  }

  Vector eta = centered_predictor(ctx, a, alpha, ctx.scores(b));
  FitDiagnostics diag;
  auto overflowed = [&](const Vector& e) {
    for (Index i = 0; i < e.size(); ++i)
      if (eta_overflows(fam, e[i])) return true;
    return false;
  };
  diag.eta_overflow = overflowed(eta);
  diag.loglik_trace.push_back(fitted_loglik(fam, d.y, eta));

  std::optional<KrylovStep> step;
  bool converged = false;
  int iter = 0;
  while (iter < cfg.max_iter) {
    ++iter;
    const Vector ytilde = pseudo_responses(fam, d.y, eta);
    double ann_res = 0.0;
    if (weighted) {
      step.emplace(weighted_step(ctx, info_weights(fam, eta), ytilde, cfg.p, cfg.krylov, &ann_res));
    } else {
      step.emplace(krylov_step(ctx.covariance(), ctx.seed(ytilde, &ann_res), cfg.p, cfg.krylov));
    }
    diag.annihilator_residual = ann_res;

    const Vector offset = ctx.scores(step->b);
    double a_new = a;
    Vector alpha_new = alpha;
    Vector eta_new = eta;
    double ll = -std::numeric_limits<double>::infinity();
    double change = std::numeric_limits<double>::infinity();
    try {
      std::tie(a_new, alpha_new) = centered_scalar_fit(ctx, fam, d.y, offset, a, alpha);
      change = std::abs(a_new - a) + (alpha_new - alpha).norm() + norm(step->b - b);
      eta_new = centered_predictor(ctx, a_new, alpha_new, offset);
      ll = fitted_loglik(fam, d.y, eta_new);
    } catch (const Error& e) {
      // A proposal whose score equations fail is shortened like any other bad step.
      if (!halving || e.kind() != ErrorKind::score_solve_failure) throw;
    }
    DiscretizedFunction b_new = step->b;

    // Only a collapse of the log-likelihood counts as a bad step: fixed points
    // of the iteration are not likelihood maxima, so small drops are normal.
    const double ll_floor = diag.loglik_trace.back() - kCollapseFraction * std::abs(diag.loglik_trace.back());
    if (halving && !(ll >= ll_floor)) {
      double t = 1.0;
      for (int h = 0; h < kMaxHalvings; ++h) {
        t *= 0.5;
        DiscretizedFunction b_t = b + t * (step->b - b);
        Vector off_t = ctx.scores(b_t);
        try {
          auto [a_t, alpha_t] = centered_scalar_fit(ctx, fam, d.y, off_t, a, alpha);
          Vector eta_t = centered_predictor(ctx, a_t, alpha_t, off_t);
          const double ll_t = fitted_loglik(fam, d.y, eta_t);
          a_new = a_t;
          alpha_new = std::move(alpha_t);
          eta_new = std::move(eta_t);
          b_new = std::move(b_t);
          ll = ll_t;
          if (ll_t >= ll_floor) break;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::score_solve_failure) throw;
        }
      }
      if (ll == -std::numeric_limits<double>::infinity())
        detail::fail(ErrorKind::score_solve_failure,
                     "score equations fail along the whole step at iteration " + std::to_string(iter));
    }

    a = a_new;
    alpha = std::move(alpha_new);
    b = std::move(b_new);
    eta = std::move(eta_new);
    diag.eta_overflow = diag.eta_overflow || overflowed(eta);
    if (std::isnan(ll))
      detail::fail(ErrorKind::numerical_divergence, "log-likelihood became NaN at iteration " + std::to_string(iter));
    diag.loglik_trace.push_back(ll);
    if (change <= cfg.tol) {
      converged = true;
      break;
    }
  }

  diag.gram_condition = step->condition;
  diag.hankel_deviation = step->system.hankel_deviation;
  if (gaussian) diag.sigma2 = (d.y - eta).squaredNorm() / static_cast<double>(d.n());
  const double ll = diag.loglik_trace.back();
  const int df = cfg.p + static_cast<int>(d.q()) + (gaussian ? 2 : 1);
  const double alpha0 = ctx.original_intercept(a, alpha, b);

  RaplsFit fit{.method = "rapls",
               .family = fam,
               .p = cfg.p,
               .gamma = step->gamma,
               .basis = step->basis,
               .b_hat = std::move(b),
               .alpha0 = alpha0,
               .alpha = std::move(alpha),
               .n_iter = iter,
               .converged = converged,
               .loglik = ll,
               .aic = -2.0 * ll + 2.0 * static_cast<double>(df),
               .eta = std::move(eta),
               .diagnostics = std::move(diag)};
  if (!converged) throw NonConvergence(std::move(fit));
  return fit;
}

}  // namespace rapls
