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

#include "rapls/select.hpp"

#include <algorithm>

#include "rapls/fpcr.hpp"

namespace rapls {

std::string_view to_string(Method m) { return m == Method::rapls ? "rapls" : "fpcr"; }

Method parse_method(std::string_view name) {
  if (name == "rapls") return Method::rapls;
  if (name == "fpcr") return Method::fpcr;
  detail::fail(ErrorKind::invalid_argument, "unknown method '" + std::string(name) + "'");
}

int degrees_of_freedom(ExpFamily fam, int p, Index q) {
  return p + static_cast<int>(q) + 1 + (fam == ExpFamily::gaussian ? 1 : 0);
}

double aic(const RaplsFit& fit, const Dataset& d, ExpFamily fam) {
  if (!fit.converged) detail::fail(ErrorKind::invalid_fit, "AIC of a non-converged fit");
  return -2.0 * fit.loglik + 2.0 * static_cast<double>(degrees_of_freedom(fam, fit.p, d.q()));
}

namespace {

std::string describe(const std::vector<PFailure>& failures) {
  std::string s = "no component count could be fitted";
  for (const auto& f : failures) s += "; p=" + std::to_string(f.p) + ": " + f.message;
  return s;
}

}  // namespace

SelectionFailure::SelectionFailure(std::vector<PFailure> failures)
    : Error(ErrorKind::selection_failure, describe(failures)), failures_(std::move(failures)) {}

RaplsFit fit_method(const Dataset& d, ExpFamily fam, const FitConfig& cfg, Method method) {
  if (method == Method::fpcr) return fit_fpcr(d, fam, cfg.p);
  return fit_gflm(d, fam, cfg);
}

SelectionResult select_p(const Dataset& d, ExpFamily fam, int p_max, const FitConfig& cfg, Method method) {
  detail::require(p_max >= 1, "select_p: p_max must be positive");
  d.validate();
  check_outcomes(fam, d.y);

  SelectionResult res;
  std::optional<EigenSystem> eig;
  int limit = p_max;
  if (method == Method::fpcr) {
    // Room for the intercept and covariates in the PC regression.
    const int room = static_cast<int>(std::min<Index>(d.n() - d.q() - 2, std::min(d.n(), d.G())));
    if (room < limit) {
      limit = std::max(room, 0);
      res.truncated_at = limit + 1;
    }
    if (limit >= 1) {
      try {
        eig = fpca(d.X, d.grid, limit);
      } catch (const RankDeficient& e) {
        limit = e.attainable();
        res.truncated_at = limit + 1;
        if (limit >= 1) eig = fpca(d.X, d.grid, limit);
      }
    }
  }

  double best = std::numeric_limits<double>::infinity();
  for (int p = 1; p <= limit; ++p) {
    ++res.fits_considered;
    try {
      FitConfig c = cfg;
      c.p = p;
      RaplsFit fit = method == Method::fpcr ? fit_fpcr(d, fam, *eig, p) : fit_gflm(d, fam, c);
      const double a = aic(fit, d, fam);
      res.aic_curve.emplace_back(p, a);
      if (a < best) {
        best = a;
        res.best_p = p;
        res.best_fit = std::move(fit);
      }
    } catch (const IllConditionedGram& e) {
      res.failures.push_back({p, e.kind(), e.what()});
      res.truncated_at = p;
      break;
    } catch (const Error& e) {
      res.failures.push_back({p, e.kind(), e.what()});
      if (e.kind() == ErrorKind::degenerate_system || e.kind() == ErrorKind::rank_deficient) {
        res.truncated_at = p;
        break;
      }
    }
  }
  if (res.aic_curve.empty()) throw SelectionFailure(std::move(res.failures));
  return res;
}

}  // namespace rapls
