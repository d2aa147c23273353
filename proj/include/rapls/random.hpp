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

#include <cstdint>
#include <random>

#include "rapls/funcore.hpp"

namespace rapls {

/// SplitMix64 finalizer; a bijection on 64-bit integers.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of an independent stream: splitmix64 of the base seed offset by the
/// rep index (times an odd constant) and the stream tag. Injective in rep
/// for a fixed base seed and tag.
std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t rep, std::uint64_t tag = 0) noexcept;

/// Portable random stream: std::mt19937_64 (output fixed by the standard),
/// uniforms on the open interval ((x >> 11) + 0.5) / 2^53, and normal and
/// Poisson variates by exact inversion of the CDF via Boost.Math quantiles.
/// Results are identical on every conforming platform.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Smallest k with P(K <= k) >= u for u ~ U(0,1).
  double poisson(double mean);

 private:
  std::mt19937_64 engine_;
};

/// Inverse standard normal CDF.
double normal_quantile(double u);
/// Inverse Poisson CDF, rounded up to the next integer.
double poisson_quantile(double mean, double u);

/// Draws paths of a zero-mean Gaussian process with a given covariance
/// kernel on a grid, through a symmetric square root of the G x G kernel
/// matrix (negative eigenvalues from round-off are zeroed).
class GaussianProcessSampler {
 public:
  GaussianProcessSampler(GridPtr grid, const Matrix& kernel);

  DiscretizedFunction draw(RandomStream& rng) const;
  const GridPtr& grid() const noexcept { return grid_; }

 private:
  GridPtr grid_;
  Matrix factor_;
};

/// Sampler for the kernel exp(-rate (s - t)^2).
GaussianProcessSampler squared_exponential_sampler(const GridPtr& grid, double rate = 10.0);

}  // namespace rapls
