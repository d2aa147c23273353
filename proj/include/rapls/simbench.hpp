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
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rapls/random.hpp"
#include "rapls/select.hpp"

namespace rapls {

/// Coefficient function supported on the leading (I) or trailing (II)
/// half of the 50-term cosine expansion.
enum class Scenario { I, II };

std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view name);

/// Either a fixed number of components or AIC selection up to p_max.
struct PPolicy {
  enum class Kind { fixed, aic } kind = Kind::aic;
  int p = 1;
  int p_max = 20;
};

enum class InitKind { deterministic, random };

struct SimConfig {
  ExpFamily family = ExpFamily::gaussian;
  Scenario scenario = Scenario::I;
  int n = 100;
  int reps = 1;
  PPolicy p_policy;
  InitKind init = InitKind::deterministic;
  std::uint64_t base_seed = 1;
  int grid_points = 900;
  std::vector<Method> methods{Method::rapls};

  // Fitting controls beyond the simulation design.
  double tol = 1e-4;
  int max_iter = 100;
  FitOptions krylov;
  Residualization residualization = Residualization::weighted;
  StepControl step_control = StepControl::halving;
  /// Calibration truncation; 0 selects the default rule.
  int s_n = 0;

  /// Throws invalid-argument naming the offending field.
  void validate() const;
};

/// Parses the JSON form of a configuration; unknown or malformed fields
/// raise invalid-argument naming the field.
SimConfig parse_sim_config(std::string_view json_text);
std::string sim_config_json(const SimConfig& cfg);

struct TruthBundle {
  DiscretizedFunction b_star;
  double alpha_star = 1.0;
  double alpha0_star = 0.5;
  ExpFamily family = ExpFamily::gaussian;
};

inline constexpr int kCurveTerms = 50;

/// Curves sum_k k^{-1/4} xi_ik phi_k on the grid together with the scores.
struct CurveDraw {
  Matrix X;   // n x G
  Matrix xi;  // n x kCurveTerms
};

/// n x kCurveTerms standard normal scores, row by row.
Matrix draw_curve_scores(Index n, RandomStream& rng);
/// Curves from given scores (zero scores give zero curves).
Matrix assemble_curves(const Matrix& xi, const GridPtr& grid);
CurveDraw gen_curves(Index n, const GridPtr& grid, RandomStream& rng);

/// Uniform trapezoid grid on [0, 1].
GridPtr simulation_grid(int points);

/// c * sum_{k in scenario} (-1)^k phi_k with c = 1 (Gaussian) or 2/3 (Poisson).
TruthBundle make_truth(ExpFamily fam, Scenario s, const GridPtr& grid);

/// Testing hooks that switch off parts of the generator.
struct GenHooks {
  bool zero_scores = false;
  bool zero_noise = false;
};

struct SimDataset {
  Dataset data;
  TruthBundle truth;
};

/// Replication `rep` of the design. The stream seed depends only on
/// (base_seed, rep). Poisson predictors above 30 trigger one resample from a
/// second stream, then degenerate-replication.
SimDataset gen_dataset(const SimConfig& cfg, int rep, const GenHooks& hooks = {});

/// Integrated squared difference.
double mse_b(const DiscretizedFunction& b_hat, const DiscretizedFunction& b_star);

struct RepRecord {
  int rep = 0;
  Method method = Method::rapls;
  double mse_b = 0.0;
  double mse_alpha = 0.0;
  int p_used = 0;
  int n_iter = 0;
  bool converged = false;
  double alpha_hat = 0.0;
  /// Standard error of the calibrated estimate (NaN for FPCR).
  double std_error = 0.0;
};

struct RepFailure {
  int rep = 0;
  Method method = Method::rapls;
  ErrorKind kind = ErrorKind::invalid_argument;
  std::string message;
};

struct MethodSummary {
  Method method = Method::rapls;
  int count = 0;
  double mean_mse_b = 0.0;
  double sd_mse_b = 0.0;
  double mean_mse_alpha = 0.0;
  double sd_mse_alpha = 0.0;
  double mean_p = 0.0;
  /// Share of reps whose alpha_hat +- 1.96 se covers alpha* (NaN without SEs).
  double coverage = 0.0;
  int failures = 0;
};

struct ExperimentResult {
  SimConfig config;
  std::vector<RepRecord> records;  // ordered by (rep, method)
  std::vector<RepFailure> failures;
  std::vector<MethodSummary> summary;
};

class ExperimentFailure : public Error {
 public:
  ExperimentFailure(int failed_reps, int reps, std::vector<RepFailure> log);
  const std::vector<RepFailure>& log() const noexcept { return log_; }

 private:
  std::vector<RepFailure> log_;
};

/// One replication of one method; throws on failure.
RepRecord run_replication(const SimConfig& cfg, const SimDataset& sim, int rep, Method method);

/// Summaries recomputed from records.
std::vector<MethodSummary> summarize(const SimConfig& cfg, const std::vector<RepRecord>& records,
                                     const std::vector<RepFailure>& failures);

/// Runs all replications on `threads` workers (0 = hardware concurrency).
/// Throws experiment-failure when more than 10% of reps fail.
ExperimentResult run_experiment(const SimConfig& cfg, unsigned threads = 0);
/// Runs only the listed reps.
ExperimentResult run_experiment(const SimConfig& cfg, const std::vector<int>& reps, unsigned threads = 0);

/// "%.17g" formatting.
std::string format_real(double x);

/// Header plus one row per record.
void write_records(std::ostream& os, const ExperimentResult& result);
/// JSON summary block.
void write_summary(std::ostream& os, const ExperimentResult& result);

}  // namespace rapls
