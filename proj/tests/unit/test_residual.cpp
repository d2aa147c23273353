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
#include "rapls/residual.hpp"
#include "test_util.hpp"

using namespace rapls;

TEST_SUITE("residual") {
  TEST_CASE("annihilator equals the explicit projection formula") {
    oracle::Normals rng(11);
    const Matrix Z = rng.mat(25, 3);
    const Annihilator A(Z);
    const Matrix M = Matrix::Identity(25, 25) - Z * (Z.transpose() * Z).inverse() * Z.transpose();
    const Vector v = rng.vec(25);
    CHECK(oracle::rel_diff(A.apply(v), M * v) <= 1e-12);
    const Matrix V = rng.mat(25, 4);
    CHECK((A.apply_columns(V) - M * V).norm() <= 1e-12 * V.norm());
    // Z^T M v = 0 and M is idempotent.
    CHECK((Z.transpose() * A.apply(v)).norm() <= 1e-12 * Z.norm() * v.norm());
    CHECK(oracle::rel_diff(A.apply(A.apply(v)), A.apply(v)) <= 1e-13);
    CHECK(A.condition() >= 1.0);
  }

  TEST_CASE("no covariates is the identity; a ones column centers") {
    oracle::Normals rng(12);
    const Vector v = rng.vec(10);
    const Annihilator I(Matrix(10, 0));
    CHECK(I.apply(v) == v);
    const Annihilator C(Matrix::Ones(10, 1));
    const Vector c = C.apply(v);
    CHECK(std::abs(c.sum()) <= 1e-12);
    CHECK(oracle::rel_diff(c, Vector(v.array() - v.mean())) <= 1e-13);
  }

  TEST_CASE("collinear covariates are refused") {
    oracle::Normals rng(13);
    Matrix Z = rng.mat(20, 2);
    Z.col(1) = 2.0 * Z.col(0);
    CHECK_THROWS_KIND(Annihilator(Z), ErrorKind::collinear_covariates);
    Z.col(1) = 2.0 * Z.col(0) + 1e-9 * rng.vec(20);
    CHECK_THROWS_KIND(Annihilator(Z), ErrorKind::collinear_covariates);
    CHECK_THROWS_KIND(Annihilator(rng.mat(3, 3)), ErrorKind::invalid_argument);
  }

  TEST_CASE("residual covariance: kernel, factored operator and double loop agree") {
    oracle::Normals rng(14);
    const GridPtr g = make_grid(15, 0.0, 1.0);
    const Matrix X = rng.mat(30, 15);
    const Matrix Z = rng.mat(30, 2);
    const Annihilator A(Z);
    const KernelMatrix K = residual_cov(X, A, g);

    const Matrix M = Matrix::Identity(30, 30) - Z * (Z.transpose() * Z).inverse() * Z.transpose();
    const Matrix R = M * X;
    for (Index s = 0; s < 15; ++s)
      for (Index t = 0; t < 15; ++t) {
        double acc = 0.0;
        for (Index i = 0; i < 30; ++i) acc += R(i, s) * R(i, t);
        CHECK(K.values()(s, t) == doctest::Approx(acc / 30.0).epsilon(1e-11));
      }
    // Symmetric positive semidefinite.
    Eigen::SelfAdjointEigenSolver<Matrix> es(K.values());
    CHECK(es.eigenvalues().minCoeff() >= -1e-12 * es.eigenvalues().maxCoeff());

    const ResidualCovariance C(g, A.apply_columns(X));
    const Vector f = rng.vec(15);
    CHECK(oracle::rel_diff(C.apply(f), K.apply(f)) <= 1e-12);
    CHECK((C.to_kernel().values() - K.values()).norm() <= 1e-12 * K.values().norm());
  }

  TEST_CASE("dimension checks") {
    oracle::Normals rng(15);
    const Annihilator A(rng.mat(10, 1));
    CHECK_THROWS_KIND(A.apply(Vector::Zero(9)), ErrorKind::invalid_argument);
    CHECK_THROWS_KIND(residual_cov(rng.mat(10, 4), A, make_grid(5, 0.0, 1.0)), ErrorKind::invalid_argument);
  }
}
