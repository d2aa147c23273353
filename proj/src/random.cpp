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

#include "rapls/random.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/poisson.hpp>

#include <cmath>

namespace rapls {

namespace {
using PoissonRoundUp = boost::math::poisson_distribution<
    double, boost::math::policies::policy<
                boost::math::policies::discrete_quantile<boost::math::policies::integer_round_up>>>;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t rep, std::uint64_t tag) noexcept {
  return splitmix64(splitmix64(base_seed ^ (tag * 0xD1B54A32D192ED03ULL)) + rep * 0x9E3779B97F4A7C15ULL);
}

double normal_quantile(double u) {
  detail::require(u > 0.0 && u < 1.0, "normal_quantile: u must lie in (0, 1)");
  static const boost::math::normal_distribution<double> standard(0.0, 1.0);
  return boost::math::quantile(standard, u);
}

double poisson_quantile(double mean, double u) {
  detail::require(mean >= 0.0 && std::isfinite(mean), "poisson_quantile: mean must be finite and >= 0");
  detail::require(u > 0.0 && u < 1.0, "poisson_quantile: u must lie in (0, 1)");
  if (mean == 0.0) return 0.0;
  return boost::math::quantile(PoissonRoundUp(mean), u);
}

double RandomStream::uniform() {
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  return (static_cast<double>(engine_() >> 11) + 0.5) * scale;
}

double RandomStream::normal() { return normal_quantile(uniform()); }

double RandomStream::poisson(double mean) { return poisson_quantile(mean, uniform()); }

GaussianProcessSampler::GaussianProcessSampler(GridPtr grid, const Matrix& kernel) : grid_(std::move(grid)) {
  const Index g = grid_->size();
  detail::require(kernel.rows() == g && kernel.cols() == g, "GP sampler: kernel must be G x G");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (kernel + kernel.transpose()));
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  factor_ = es.eigenvectors() * root.asDiagonal();
}

DiscretizedFunction GaussianProcessSampler::draw(RandomStream& rng) const {
  Vector xi(factor_.cols());
  for (Index k = 0; k < xi.size(); ++k) xi[k] = rng.normal();
  return DiscretizedFunction(grid_, factor_ * xi);
}

GaussianProcessSampler squared_exponential_sampler(const GridPtr& grid, double rate) {
  const Vector& s = grid->points();
  const Index g = s.size();
  Matrix K(g, g);
  for (Index j = 0; j < g; ++j)
    for (Index k = 0; k < g; ++k) K(j, k) = std::exp(-rate * (s[j] - s[k]) * (s[j] - s[k]));
  return GaussianProcessSampler(grid, K);
}

}  // namespace rapls
