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

#include <doctest.h>

#include "oracles.hpp"
#include "rapls/raplscore.hpp"
#include "test_util.hpp"

using namespace rapls;

namespace {

// RAPLS fitted values through the library.
Vector fitted(const RaplsFit& f, const Dataset& d) { return linear_predictor(d, f.alpha0, f.alpha, f.b_hat); }

}  // namespace

TEST_SUITE("raplscore") {
  TEST_CASE("krylov basis iterates the operator") {
    const Dataset d = oracle::gaussian_toy(40, 25, 1, 21);
    const LinearContext ctx(d);
    const DiscretizedFunction v = ctx.seed(d.y, nullptr);
    const RaplsBasis B = krylov_basis(ctx.covariance(), v, 4);
    REQUIRE(B.p() == 4);
    for (int j = 1; j < 4; ++j)
      CHECK(oracle::rel_diff(B.functions[j].values(), ctx.covariance().apply(B.functions[j - 1].values())) <= 1e-14);
  }

  TEST_CASE("Gram matrix is Hankel in the moments and matches direct inner products") {
    const Dataset d = oracle::gaussian_toy(50, 30, 2, 22);
    const LinearContext ctx(d);
    const DiscretizedFunction v = ctx.seed(d.y, nullptr);
    const RaplsBasis B = krylov_basis(ctx.covariance(), v, 3);
    const GramSystem g = gram_system(B, ctx.covariance());
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        CHECK(g.H(j, k) == g.moments[j + k + 1]);
        const DiscretizedFunction Cpk(v.grid(), ctx.covariance().apply(B.functions[k].values()));
        CHECK(g.H(j, k) == doctest::Approx(inner_product(B.functions[j], Cpk)).epsilon(1e-12));
      }
    CHECK(g.hankel_deviation <= 1e-10);
    for (int j = 0; j < 3; ++j) CHECK(g.beta[j] == g.moments[j]);
    const GramSystem lit = gram_system(B, ctx.covariance(), BetaVariant::literal);
    for (int j = 0; j < 3; ++j) CHECK(lit.beta[j] == lit.moments[j + 1]);
  }

  TEST_CASE("seed is the literal cross-covariance") {
    const Dataset d = oracle::gaussian_toy(30, 20, 1, 23);
    const Annihilator A(d.Z);
    const DiscretizedFunction v = seed_direction(d, A, d.y);
    const Matrix M = Matrix::Identity(30, 30) - d.Z * (d.Z.transpose() * d.Z).inverse() * d.Z.transpose();
    CHECK(oracle::rel_diff(v.values(), d.X.transpose() * M * d.y / 30.0) <= 1e-12);
  }

  TEST_CASE("fit equals joint least squares on intercept, covariates and Krylov scores") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const Index q = static_cast<Index>(seed % 3);
      const int p = 1 + static_cast<int>(seed % 4);
      const Dataset d = oracle::gaussian_toy(45, 24, q, 100 + seed);
      const RaplsFit fit = fit_pflm(d, p);
      const Matrix S = oracle::krylov_scores(d, p);
      Matrix D(d.n(), 1 + q + p);
      D.col(0).setOnes();
      D.middleCols(1, q) = d.Z;
      D.rightCols(p) = S;
      const Vector coef = oracle::least_squares(D, d.y);
      CHECK(std::abs(fit.alpha0 - coef[0]) <= 1e-8 * std::max(1.0, std::abs(coef[0])));
      if (q > 0) CHECK(oracle::rel_diff(fit.alpha, coef.segment(1, q)) <= 1e-8);
      CHECK(oracle::rel_diff(fit.gamma, coef.tail(p)) <= 1e-8);
    }
  }

  TEST_CASE("without covariates the fitted values equal NIPALS PLS on weighted curves") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const Dataset d = oracle::gaussian_toy(35, 20, 0, 200 + seed);
      const Matrix Xw = d.X * d.grid->weights().cwiseSqrt().asDiagonal();
      for (int p = 1; p <= 3; ++p) {
        const RaplsFit fit = fit_pflm(d, p);
        CHECK(oracle::rel_diff(fitted(fit, d), oracle::nipals_fitted(Xw, d.y, p)) <= 1e-6);
      }
    }
  }

  TEST_CASE("lanczos route reproduces the moments route") {
    const Dataset d = oracle::gaussian_toy(60, 30, 1, 31);
    for (int p = 1; p <= 4; ++p) {
      const RaplsFit a = fit_pflm(d, p);
      const RaplsFit b = fit_pflm(d, p, FitOptions{BetaVariant::population, KrylovRoute::lanczos});
      CHECK(oracle::rel_diff(a.b_hat.values(), b.b_hat.values()) <= 1e-6);
      CHECK(oracle::rel_diff(fitted(a, d), fitted(b, d)) <= 1e-8);
      CHECK(b.basis.orthonormal);
    }
  }

  TEST_CASE("literal beta variant solves its own system") {
    const Dataset d = oracle::gaussian_toy(40, 20, 1, 32);
    const RaplsFit fit = fit_pflm(d, 2, FitOptions{BetaVariant::literal, KrylovRoute::moments});
    const LinearContext ctx(d);
    const RaplsBasis B = krylov_basis(ctx.covariance(), ctx.seed(d.y, nullptr), 2);
    const GramSystem g = gram_system(B, ctx.covariance(), BetaVariant::literal);
    CHECK(oracle::rel_diff(g.H * fit.gamma, g.beta) <= 1e-10);
  }

  TEST_CASE("conditioning guard reports the usable order") {
    const Dataset d = oracle::gaussian_toy(60, 30, 1, 33, 0.0);
    bool guarded = false;
    for (int p = 2; p <= 15 && !guarded; ++p) {
      try {
        (void)fit_pflm(d, p);
      } catch (const IllConditionedGram& e) {
        guarded = true;
        CHECK(e.requested_p() == p);
        CHECK(e.usable_p() >= 1);
        CHECK(e.usable_p() < p);
        CHECK(e.condition() >= kGramMaxCondition);
        CHECK_NOTHROW(fit_pflm(d, e.usable_p()));
      }
    }
    CHECK(guarded);
  }

  TEST_CASE("rank-one curves cannot support two components") {
    oracle::Normals rng(34);
    Dataset d;
    d.grid = make_grid(20, 0.0, 1.0);
    const Vector a = rng.vec(30);
    d.X = a * cosine_basis(1, d.grid).values().transpose();
    d.Z = Matrix(30, 0);
    d.y = 2.0 * a + 0.1 * rng.vec(30);
    CHECK_NOTHROW(fit_pflm(d, 1));
    CHECK(thrown_kind([&] { (void)fit_pflm(d, 2); }) == ErrorKind::ill_conditioned_gram);
  }

  TEST_CASE("outcome explained by covariates alone is a degenerate seed") {
    oracle::Normals rng(35);
    Dataset d = oracle::gaussian_toy(30, 20, 2, 36);
    d.y = 1.0 + 2.0 * d.Z.col(0).array() - d.Z.col(1).array();
    CHECK_THROWS_KIND(fit_pflm(d, 1), ErrorKind::degenerate_seed);
  }

  TEST_CASE("gram solve guards") {
    GramSystem g;
    g.H = Matrix::Identity(2, 2);
    g.H(0, 1) = 0.5;
    g.beta = Vector::Ones(2);
    CHECK_THROWS_KIND(solve_coefficients(g), ErrorKind::invalid_argument);
    g.H = Matrix::Zero(1, 1);
    g.beta = Vector::Ones(1);
    CHECK_THROWS_KIND(solve_coefficients(g), ErrorKind::degenerate_system);
    g.H = Matrix::Identity(2, 2) * 2.0;
    g.beta = Vector::Ones(2);
    CHECK(oracle::rel_diff(solve_coefficients(g), Vector::Constant(2, 0.5)) <= 1e-15);
  }

  TEST_CASE("fit bookkeeping") {
    const Dataset d = oracle::gaussian_toy(40, 20, 1, 37);
    const RaplsFit fit = fit_pflm(d, 2);
    const Vector r = d.y - fitted(fit, d);
    CHECK(fit.diagnostics.sigma2 == doctest::Approx(r.squaredNorm() / 40.0).epsilon(1e-10));
    CHECK(fit.loglik == doctest::Approx(-20.0 * (std::log(2.0 * M_PI * fit.diagnostics.sigma2) + 1.0)));
    CHECK(fit.aic == doctest::Approx(-2.0 * fit.loglik + 2.0 * (2 + 1 + 2)));
    CHECK(fit.diagnostics.annihilator_residual <= 1e-10);
    CHECK(fit.diagnostics.hankel_deviation <= 1e-10);
    // The fitted residual is orthogonal to the covariates and intercept.
    CHECK(std::abs(r.sum()) <= 1e-9 * d.y.norm());
    CHECK(std::abs(r.dot(d.Z.col(0))) <= 1e-9 * d.y.norm() * d.Z.norm());
  }

  TEST_CASE("dataset validation") {
    Dataset d = oracle::gaussian_toy(20, 10, 1, 38);
    d.y.conservativeResize(19);
    CHECK_THROWS_KIND(fit_pflm(d, 1), ErrorKind::invalid_argument);
    Dataset e = oracle::gaussian_toy(20, 10, 1, 38);
    CHECK_THROWS_KIND(fit_pflm(e, 0), ErrorKind::invalid_argument);
    CHECK_THROWS_KIND(parse_beta_variant("other"), ErrorKind::invalid_argument);
  }
}
