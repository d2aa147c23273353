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

#include "rapls/simbench.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "rapls/calibrate.hpp"

namespace rapls {

namespace {

using nlohmann::json;

[[noreturn]] void field_error(std::string_view field, const std::string& what) {
  detail::fail(ErrorKind::invalid_argument, "config field '" + std::string(field) + "': " + what);
}

std::string quoted(std::string_view s) { return json(std::string(s)).dump(); }

std::string real_or_null(double x) { return std::isfinite(x) ? format_real(x) : "null"; }

}  // namespace

std::string_view to_string(Scenario s) { return s == Scenario::I ? "I" : "II"; }

Scenario parse_scenario(std::string_view name) {
  if (name == "I" || name == "1") return Scenario::I;
  if (name == "II" || name == "2") return Scenario::II;
  detail::fail(ErrorKind::invalid_argument, "unknown scenario '" + std::string(name) + "'");
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void SimConfig::validate() const {
  if (family == ExpFamily::bernoulli) field_error("family", "simulation supports gaussian and poisson");
  if (n < 3) field_error("n", "must be at least q + 2 = 3");
  if (reps < 1) field_error("reps", "must be at least 1");
  if (grid_points < 4) field_error("grid_points", "must be at least 4");
  if (p_policy.kind == PPolicy::Kind::fixed && p_policy.p < 1) field_error("p_policy", "p must be positive");
  if (p_policy.kind == PPolicy::Kind::aic && p_policy.p_max < 1) field_error("p_policy", "p_max must be positive");
  if (methods.empty()) field_error("methods", "at least one method required");
  if (std::set<Method>(methods.begin(), methods.end()).size() != methods.size())
    field_error("methods", "duplicate method");
  if (!(tol > 0.0)) field_error("tol", "must be positive");
  if (max_iter < 1) field_error("max_iter", "must be at least 1");
  if (s_n < 0) field_error("s_n", "must be non-negative");
}

SimConfig parse_sim_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    detail::fail(ErrorKind::invalid_argument, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) detail::fail(ErrorKind::invalid_argument, "config must be a JSON object");

  SimConfig c;
  auto str = [&](const char* key) -> std::string {
    if (!j.at(key).is_string()) field_error(key, "expected a string");
    return j.at(key).get<std::string>();
  };
  auto integer = [&](const json& v, std::string_view key) -> long long {
    if (!v.is_number_integer()) field_error(key, "expected an integer");
    return v.get<long long>();
  };
  auto wrap = [&](std::string_view key, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      if (std::string_view(e.what()).find("config field") != std::string_view::npos) throw;
      field_error(key, e.what());
    }
  };

  for (const char* required : {"family", "scenario", "n", "reps"})
    if (!j.contains(required)) field_error(required, "missing");

  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    if (key == "family") {
      wrap(key, [&] { c.family = parse_family(str("family")); });
    } else if (key == "scenario") {
      wrap(key, [&] { c.scenario = parse_scenario(str("scenario")); });
    } else if (key == "n") {
      c.n = static_cast<int>(integer(v, key));
    } else if (key == "reps") {
      c.reps = static_cast<int>(integer(v, key));
    } else if (key == "grid_points") {
      c.grid_points = static_cast<int>(integer(v, key));
    } else if (key == "base_seed") {
      if (!v.is_number_unsigned() && !v.is_number_integer()) field_error(key, "expected an integer");
      c.base_seed = v.get<std::uint64_t>();
    } else if (key == "init") {
      const std::string s = str("init");
      if (s == "deterministic") c.init = InitKind::deterministic;
      else if (s == "random") c.init = InitKind::random;
      else field_error(key, "unknown init '" + s + "'");
    } else if (key == "p_policy") {
      if (!v.is_object() || !v.contains("kind")) field_error(key, "expected {\"kind\": \"fixed\"|\"aic\", ...}");
      const json& kind = v.at("kind");
      if (kind == "fixed") {
        c.p_policy.kind = PPolicy::Kind::fixed;
        if (!v.contains("p")) field_error("p_policy.p", "missing");
        c.p_policy.p = static_cast<int>(integer(v.at("p"), "p_policy.p"));
      } else if (kind == "aic") {
        c.p_policy.kind = PPolicy::Kind::aic;
        if (!v.contains("p_max")) field_error("p_policy.p_max", "missing");
        c.p_policy.p_max = static_cast<int>(integer(v.at("p_max"), "p_policy.p_max"));
      } else {
        field_error("p_policy.kind", "expected \"fixed\" or \"aic\"");
      }
    } else if (key == "methods") {
      if (!v.is_array()) field_error(key, "expected an array of method names");
      c.methods.clear();
      for (const auto& m : v) {
        if (!m.is_string()) field_error(key, "expected an array of method names");
        wrap(key, [&] { c.methods.push_back(parse_method(m.get<std::string>())); });
      }
    } else if (key == "tol") {
      if (!v.is_number()) field_error(key, "expected a number");
      c.tol = v.get<double>();
    } else if (key == "max_iter") {
      c.max_iter = static_cast<int>(integer(v, key));
    } else if (key == "beta_variant") {
      wrap(key, [&] { c.krylov.beta_variant = parse_beta_variant(str("beta_variant")); });
    } else if (key == "krylov") {
      wrap(key, [&] { c.krylov.route = parse_krylov_route(str("krylov")); });
    } else if (key == "residualization") {
      wrap(key, [&] { c.residualization = parse_residualization(str("residualization")); });
    } else if (key == "step_control") {
      wrap(key, [&] { c.step_control = parse_step_control(str("step_control")); });
    } else if (key == "s_n") {
      c.s_n = static_cast<int>(integer(v, key));
    } else {
      field_error(key, "unknown field");
    }
  }
  c.validate();
  return c;
}

std::string sim_config_json(const SimConfig& c) {
  std::string methods;
  for (std::size_t k = 0; k < c.methods.size(); ++k)
    methods += (k ? ", " : "") + quoted(to_string(c.methods[k]));
  const std::string policy = c.p_policy.kind == PPolicy::Kind::fixed
                                 ? "{\"kind\": \"fixed\", \"p\": " + std::to_string(c.p_policy.p) + "}"
                                 : "{\"kind\": \"aic\", \"p_max\": " + std::to_string(c.p_policy.p_max) + "}";
  std::string s = "{";
  s += "\"family\": " + quoted(to_string(c.family));
  s += ", \"scenario\": " + quoted(to_string(c.scenario));
  s += ", \"n\": " + std::to_string(c.n);
  s += ", \"reps\": " + std::to_string(c.reps);
  s += ", \"p_policy\": " + policy;
  s += ", \"init\": " + quoted(c.init == InitKind::random ? "random" : "deterministic");
  s += ", \"base_seed\": " + std::to_string(c.base_seed);
  s += ", \"grid_points\": " + std::to_string(c.grid_points);
  s += ", \"methods\": [" + methods + "]";
  s += ", \"tol\": " + format_real(c.tol);
  s += ", \"max_iter\": " + std::to_string(c.max_iter);
  s += ", \"beta_variant\": " + quoted(to_string(c.krylov.beta_variant));
  s += ", \"krylov\": " + quoted(to_string(c.krylov.route));
  s += ", \"residualization\": " + quoted(to_string(c.residualization));
  s += ", \"step_control\": " + quoted(to_string(c.step_control));
  s += ", \"s_n\": " + std::to_string(c.s_n);
  s += "}";
  return s;
}

GridPtr simulation_grid(int points) { return make_grid(points, 0.0, 1.0); }

Matrix draw_curve_scores(Index n, RandomStream& rng) {
  Matrix xi(n, kCurveTerms);
  for (Index i = 0; i < n; ++i)
    for (int k = 0; k < kCurveTerms; ++k) xi(i, k) = rng.normal();
  return xi;
}

Matrix assemble_curves(const Matrix& xi, const GridPtr& grid) {
  detail::require(xi.cols() == kCurveTerms, "assemble_curves: expected one score per basis term");
  Matrix phi(grid->size(), kCurveTerms);
  for (int k = 1; k <= kCurveTerms; ++k)
    phi.col(k - 1) = cosine_basis(k, grid).values() * std::pow(static_cast<double>(k), -0.25);
  return xi * phi.transpose();
}

CurveDraw gen_curves(Index n, const GridPtr& grid, RandomStream& rng) {
  CurveDraw d;
  d.xi = draw_curve_scores(n, rng);
  d.X = assemble_curves(d.xi, grid);
  return d;
}

TruthBundle make_truth(ExpFamily fam, Scenario s, const GridPtr& grid) {
  const double c = fam == ExpFamily::poisson ? 2.0 / 3.0 : 1.0;
  const int first = s == Scenario::I ? 1 : 26;
  Vector b = Vector::Zero(grid->size());
  for (int k = first; k < first + 25; ++k) b += (k % 2 == 0 ? c : -c) * cosine_basis(k, grid).values();
  return TruthBundle{DiscretizedFunction(grid, std::move(b)), 1.0, 0.5, fam};
}

SimDataset gen_dataset(const SimConfig& cfg, int rep, const GenHooks& hooks) {
  cfg.validate();
  detail::require(rep >= 0, "gen_dataset: rep must be non-negative");
  const GridPtr grid = simulation_grid(cfg.grid_points);
  TruthBundle truth = make_truth(cfg.family, cfg.scenario, grid);
  const Index n = cfg.n;

  for (std::uint64_t attempt = 0; attempt < 2; ++attempt) {
    RandomStream rng(stream_seed(cfg.base_seed, static_cast<std::uint64_t>(rep), attempt));
    Matrix xi = draw_curve_scores(n, rng);
    if (hooks.zero_scores) xi.setZero();
    Matrix X = assemble_curves(xi, grid);

    Matrix Z(n, 1);
    for (Index i = 0; i < n; ++i) Z(i, 0) = std::abs(xi(i, 4)) / std::sqrt(5.0) * rng.normal();

    Vector eta = curve_scores(X, *grid, truth.b_star.values());
    eta.array() += truth.alpha0_star;
    eta += truth.alpha_star * Z.col(0);

    Vector y(n);
    if (cfg.family == ExpFamily::gaussian) {
      const double sd = std::sqrt(0.8);
      for (Index i = 0; i < n; ++i) {
        const double e = rng.normal();
        y[i] = eta[i] + (hooks.zero_noise ? 0.0 : sd * e);
      }
    } else {
      if ((eta.array() > kPoissonEtaCap).any()) continue;
      for (Index i = 0; i < n; ++i) y[i] = rng.poisson(std::exp(eta[i]));
    }
    return SimDataset{Dataset{std::move(y), std::move(X), std::move(Z), grid}, std::move(truth)};
  }
  detail::fail(ErrorKind::degenerate_replication,
               "rep " + std::to_string(rep) + ": Poisson predictor above 30 after one resample");
}

double mse_b(const DiscretizedFunction& b_hat, const DiscretizedFunction& b_star) {
  check_same_grid(*b_hat.grid(), *b_star.grid());
  const double d = norm(b_hat - b_star);
  return d * d;
}

ExperimentFailure::ExperimentFailure(int failed_reps, int reps, std::vector<RepFailure> log)
    : Error(ErrorKind::experiment_failure,
            std::to_string(failed_reps) + " of " + std::to_string(reps) + " replications failed (more than 10%)" +
                (log.empty() ? std::string()
                             : "; first: rep " + std::to_string(log.front().rep) + " " +
                                   std::string(to_string(log.front().method)) + ": " + log.front().message)),
      log_(std::move(log)) {}

RepRecord run_replication(const SimConfig& cfg, const SimDataset& sim, int rep, Method method) {
  const Dataset& d = sim.data;
  FitConfig fc;
  fc.tol = cfg.tol;
  fc.max_iter = cfg.max_iter;
  fc.krylov = cfg.krylov;
  fc.residualization = cfg.residualization;
  fc.step_control = cfg.step_control;
  if (cfg.init == InitKind::random)
    fc.init = RandomInit{stream_seed(cfg.base_seed, static_cast<std::uint64_t>(rep), 7)};

  RepRecord r;
  r.rep = rep;
  r.method = method;
  std::optional<RaplsFit> fit;
  if (cfg.p_policy.kind == PPolicy::Kind::fixed) {
    fc.p = cfg.p_policy.p;
    fit = fit_method(d, cfg.family, fc, method);
  } else {
    SelectionResult sel = select_p(d, cfg.family, cfg.p_policy.p_max, fc, method);
    fit = std::move(sel.best_fit);
  }
  r.p_used = fit->p;
  r.n_iter = fit->n_iter;
  r.converged = fit->converged;
  r.mse_b = mse_b(fit->b_hat, sim.truth.b_star);
  if (method == Method::rapls) {
    const CalibratedFit cal = calibrate(d, cfg.family, *fit, cfg.s_n);
    r.alpha_hat = cal.alpha_cal[0];
    r.std_error = cal.std_errors[0];
  } else {
    r.alpha_hat = fit->alpha[0];
    r.std_error = std::numeric_limits<double>::quiet_NaN();
  }
  const double e = r.alpha_hat - sim.truth.alpha_star;
  r.mse_alpha = e * e;
  return r;
}

std::vector<MethodSummary> summarize(const SimConfig& cfg, const std::vector<RepRecord>& records,
                                     const std::vector<RepFailure>& failures) {
  std::vector<MethodSummary> out;
  for (Method m : cfg.methods) {
    MethodSummary s;
    s.method = m;
    std::vector<const RepRecord*> rs;
    for (const auto& r : records)
      if (r.method == m) rs.push_back(&r);
    s.count = static_cast<int>(rs.size());
    for (const auto& f : failures)
      if (f.method == m) ++s.failures;
    const double nd = static_cast<double>(rs.size());
    auto mean_sd = [&](auto get, double& mean, double& sd) {
      mean = 0.0;
      sd = 0.0;
      if (rs.empty()) {
        mean = sd = std::numeric_limits<double>::quiet_NaN();
        return;
      }
      for (const auto* r : rs) mean += get(*r);
      mean /= nd;
      if (rs.size() > 1) {
        for (const auto* r : rs) sd += (get(*r) - mean) * (get(*r) - mean);
        sd = std::sqrt(sd / (nd - 1.0));
      }
    };
    mean_sd([](const RepRecord& r) { return r.mse_b; }, s.mean_mse_b, s.sd_mse_b);
    mean_sd([](const RepRecord& r) { return r.mse_alpha; }, s.mean_mse_alpha, s.sd_mse_alpha);
    double unused = 0.0;
    mean_sd([](const RepRecord& r) { return static_cast<double>(r.p_used); }, s.mean_p, unused);

    int with_se = 0;
    int covered = 0;
    for (const auto* r : rs) {
      if (!std::isfinite(r->std_error)) continue;
      ++with_se;
      if (std::abs(r->alpha_hat - 1.0) <= 1.96 * r->std_error) ++covered;
    }
    s.coverage = with_se > 0 ? static_cast<double>(covered) / with_se : std::numeric_limits<double>::quiet_NaN();
    out.push_back(s);
  }
  return out;
}

ExperimentResult run_experiment(const SimConfig& cfg, unsigned threads) {
  std::vector<int> reps(static_cast<std::size_t>(cfg.reps));
  for (int r = 0; r < cfg.reps; ++r) reps[static_cast<std::size_t>(r)] = r;
  return run_experiment(cfg, reps, threads);
}

ExperimentResult run_experiment(const SimConfig& cfg, const std::vector<int>& reps, unsigned threads) {
  cfg.validate();
  const std::size_t total = reps.size();
  std::vector<std::vector<RepRecord>> records(total);
  std::vector<std::vector<RepFailure>> failures(total);

  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mu;
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      const int rep = reps[k];
      try {
        std::optional<SimDataset> sim;
        try {
          sim = gen_dataset(cfg, rep);
        } catch (const Error& e) {
          for (Method m : cfg.methods) failures[k].push_back({rep, m, e.kind(), e.what()});
          continue;
        }
        for (Method m : cfg.methods) {
          try {
            records[k].push_back(run_replication(cfg, *sim, rep, m));
          } catch (const Error& e) {
            failures[k].push_back({rep, m, e.kind(), e.what()});
          }
        }
      } catch (...) {
        std::lock_guard lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };

  unsigned nthreads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  nthreads = static_cast<unsigned>(std::min<std::size_t>(nthreads, std::max<std::size_t>(total, 1)));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  ExperimentResult res;
  res.config = cfg;
  int failed_reps = 0;
  for (std::size_t k = 0; k < total; ++k) {
    for (auto& r : records[k]) res.records.push_back(std::move(r));
    if (!failures[k].empty()) ++failed_reps;
    for (auto& f : failures[k]) res.failures.push_back(std::move(f));
  }
  if (10 * failed_reps > static_cast<int>(total))
    throw ExperimentFailure(failed_reps, static_cast<int>(total), std::move(res.failures));
  res.summary = summarize(cfg, res.records, res.failures);
  return res;
}

void write_records(std::ostream& os, const ExperimentResult& result) {
  os << "rep,method,mse_b,mse_alpha,p_used,n_iter,converged,alpha_hat,std_error\n";
  for (const auto& r : result.records) {
    os << r.rep << ',' << to_string(r.method) << ',' << format_real(r.mse_b) << ',' << format_real(r.mse_alpha)
       << ',' << r.p_used << ',' << r.n_iter << ',' << (r.converged ? "true" : "false") << ','
       << format_real(r.alpha_hat) << ',' << format_real(r.std_error) << '\n';
  }
}

void write_summary(std::ostream& os, const ExperimentResult& result) {
  os << "{\n  \"config\": " << sim_config_json(result.config) << ",\n";
  os << "  \"records\": " << result.records.size() << ",\n";
  os << "  \"methods\": [";
  for (std::size_t k = 0; k < result.summary.size(); ++k) {
    const MethodSummary& s = result.summary[k];
    os << (k ? ",\n" : "\n") << "    {\"method\": " << quoted(to_string(s.method)) << ", \"count\": " << s.count
       << ", \"failures\": " << s.failures << ", \"mean_mse_b\": " << real_or_null(s.mean_mse_b)
       << ", \"sd_mse_b\": " << real_or_null(s.sd_mse_b) << ", \"mean_mse_alpha\": " << real_or_null(s.mean_mse_alpha)
       << ", \"sd_mse_alpha\": " << real_or_null(s.sd_mse_alpha) << ", \"mean_p\": " << real_or_null(s.mean_p)
       << ", \"coverage\": " << real_or_null(s.coverage) << "}";
  }
  os << "\n  ],\n  \"failures\": [";
  for (std::size_t k = 0; k < result.failures.size(); ++k) {
    const RepFailure& f = result.failures[k];
    os << (k ? ",\n" : "\n") << "    {\"rep\": " << f.rep << ", \"method\": " << quoted(to_string(f.method))
       << ", \"error\": " << quoted(to_string(f.kind)) << ", \"message\": " << quoted(f.message) << "}";
  }
  os << (result.failures.empty() ? "]\n}\n" : "\n  ]\n}\n");
}

}  // namespace rapls
