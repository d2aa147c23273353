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

#include <cmath>

#include "oracles.hpp"
#include "rapls/funcore.hpp"
#include "test_util.hpp"

using namespace rapls;

TEST_SUITE("funcore") {
  TEST_CASE("uniform grid carries trapezoid weights") {
    const GridPtr g = make_grid(11, 0.0, 2.0);
    CHECK(g->size() == 11);
    CHECK(g->weights()[0] == doctest::Approx(0.1));
    CHECK(g->weights()[5] == doctest::Approx(0.2));
    CHECK(g->weights().sum() == doctest::Approx(2.0).epsilon(1e-14));
  }

  TEST_CASE("grid validation") {
    Vector pts(3);
    pts << 0.0, 0.5, 0.5;
    Vector w(3);
    w << 0.25, 0.5, 0.25;
    CHECK_THROWS_KIND(Grid(pts, w), ErrorKind::invalid_argument);
    pts << 0.0, 0.5, 1.0;
    w << 0.25, 0.5, 0.3;
    CHECK_THROWS_KIND(Grid(pts, w), ErrorKind::invalid_argument);
    w << 0.25, 0.5, 0.25;
    CHECK_NOTHROW(Grid(pts, w));
    CHECK_THROWS_KIND(make_grid(1, 0.0, 1.0), ErrorKind::invalid_argument);
  }

  TEST_CASE("quadrature integrates a quadratic to second order") {
    const GridPtr g = make_grid(1001, 0.0, 1.0);
    const DiscretizedFunction f(g, g->points().array().square());
    const DiscretizedFunction one(g, Vector::Ones(g->size()));
    // Trapezoid error for s^2 on h = 1e-3 is h^2 / 6.
    CHECK(std::abs(inner_product(f, one) - 1.0 / 3.0) <= 2e-7);
    CHECK(norm(one) == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("cosine basis is orthonormal under the trapezoid rule") {
    const GridPtr g = make_grid(201, 0.0, 1.0);
    for (int j = 1; j <= 60; j += 7)
      for (int k = 1; k <= 60; k += 5) {
        const double ip = inner_product(cosine_basis(j, g), cosine_basis(k, g));
        CHECK(std::abs(ip - (j == k ? 1.0 : 0.0)) <= 1e-12);
      }
    CHECK_THROWS_KIND(cosine_basis(1, make_grid(10, 0.0, 2.0)), ErrorKind::invalid_argument);
    CHECK_THROWS_KIND(cosine_basis(0, g), ErrorKind::invalid_argument);
  }

  TEST_CASE("functions on different grids do not mix") {
    const GridPtr a = make_grid(10, 0.0, 1.0);
    const GridPtr b = make_grid(11, 0.0, 1.0);
    const DiscretizedFunction f(a, Vector::Ones(10));
    const DiscretizedFunction h(b, Vector::Ones(11));
    CHECK_THROWS_KIND(inner_product(f, h), ErrorKind::grid_mismatch);
    CHECK_THROWS_KIND(f + h, ErrorKind::grid_mismatch);
    // Equal content on distinct objects is the same grid.
    const DiscretizedFunction f2(make_grid(10, 0.0, 1.0), Vector::Ones(10));
    CHECK(inner_product(f, f2) == doctest::Approx(1.0));
  }

  TEST_CASE("non-finite values are rejected") {
    const GridPtr g = make_grid(5, 0.0, 1.0);
    Vector v = Vector::Zero(5);
    v[2] = std::nan("");
    CHECK_THROWS_KIND(DiscretizedFunction(g, v), ErrorKind::invalid_argument);
    CHECK_THROWS_KIND(DiscretizedFunction(g, Vector::Zero(4)), ErrorKind::invalid_argument);
  }

  TEST_CASE("kernel operator matches the quadrature double loop") {
    const GridPtr g = make_grid(17, 0.0, 1.0);
    oracle::Normals rng(3);
    const Matrix K = rng.mat(17, 17);
    const KernelMatrix km(g, K);
    const Vector f = rng.vec(17);
    const Vector got = km.apply(f);
    for (Index j = 0; j < 17; ++j) {
      double acc = 0.0;
      for (Index k = 0; k < 17; ++k) acc += g->weights()[k] * 0.5 * (K(j, k) + K(k, j)) * f[k];
      CHECK(got[j] == doctest::Approx(acc).epsilon(1e-13));
    }
    CHECK((km.values() - km.values().transpose()).norm() == 0.0);
  }

  TEST_CASE("curve scores are row-wise integrals") {
    const GridPtr g = make_grid(101, 0.0, 1.0);
    Matrix X(2, 101);
    X.row(0) = cosine_basis(1, g).values().transpose();
    X.row(1) = 3.0 * cosine_basis(2, g).values().transpose();
    const Vector s = curve_scores(X, *g, cosine_basis(2, g).values());
    CHECK(std::abs(s[0]) <= 1e-12);
    CHECK(s[1] == doctest::Approx(3.0).epsilon(1e-12));
  }
}
