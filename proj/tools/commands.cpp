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

#include "commands.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "manifest.hpp"
#include "rapls/calibrate.hpp"
#include "rapls/fpcr.hpp"
#include "rapls/io.hpp"
#include "rapls/select.hpp"
#include "rapls/simbench.hpp"

namespace rapls::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct FitFlags {
  std::string curves;
  std::string table;
  std::string family = "gaussian";
  std::string method = "rapls";
  std::string out;
  double tol = 1e-4;
  int max_iter = 100;
  std::string init = "deterministic";
  std::optional<std::uint64_t> seed;
  std::string beta_variant = "population";
  std::string krylov = "moments";
  std::string residualization = "weighted";
  std::string step_control = "halving";
  int p = 0;
  int select_p = 0;
  bool calibrate = false;
  int s_n = 0;
};

void add_data_flags(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--curves", f.curves, "Curve matrix file ('grid: lo hi G' header)")->required();
  cmd->add_option("--table", f.table, "Outcome/covariate table ('y z1 ... zq' header)")->required();
  cmd->add_option("--family", f.family, "gaussian | poisson | bernoulli");
  cmd->add_option("--out", f.out, "Output directory")->required();
}

void add_model_flags(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--method", f.method, "rapls | fpcr");
  cmd->add_option("--tol", f.tol, "IRLS stopping tolerance");
  cmd->add_option("--max-iter", f.max_iter, "IRLS iteration limit");
  cmd->add_option("--init", f.init, "deterministic | random");
  cmd->add_option("--seed", f.seed, "Seed for random initialization");
  cmd->add_option("--beta-variant", f.beta_variant, "population | literal");
  cmd->add_option("--krylov", f.krylov, "moments | lanczos");
  cmd->add_option("--residualization", f.residualization, "weighted | unweighted");
  cmd->add_option("--step-control", f.step_control, "halving | none");
}

void add_p_flags(CLI::App* cmd, FitFlags& f) {
  auto* p = cmd->add_option("--p", f.p, "Number of components");
  auto* s = cmd->add_option("--select-p", f.select_p, "Select p by AIC over 1..MAX");
  p->excludes(s);
}

FitConfig fit_config(const FitFlags& f) {
  FitConfig c;
  c.tol = f.tol;
  c.max_iter = f.max_iter;
  c.krylov.beta_variant = parse_beta_variant(f.beta_variant);
  c.krylov.route = parse_krylov_route(f.krylov);
  c.residualization = parse_residualization(f.residualization);
  c.step_control = parse_step_control(f.step_control);
  if (f.init == "random") {
    if (!f.seed) detail::fail(ErrorKind::invalid_argument, "--init random requires --seed");
    c.init = RandomInit{*f.seed};
  } else if (f.init != "deterministic") {
    detail::fail(ErrorKind::invalid_argument, "--init must be 'deterministic' or 'random'");
  }
  return c;
}

json config_json(const FitFlags& f) {
  json j{{"curves", f.curves},       {"table", f.table},   {"family", f.family},
         {"method", f.method},       {"tol", f.tol},       {"max_iter", f.max_iter},
         {"init", f.init},           {"beta_variant", f.beta_variant},
         {"krylov", f.krylov},       {"residualization", f.residualization},
         {"step_control", f.step_control}};
  if (f.seed) j["seed"] = *f.seed;
  if (f.p > 0) j["p"] = f.p;
  if (f.select_p > 0) j["select_p"] = f.select_p;
  if (f.calibrate) j["calibrate"] = true;
  if (f.s_n > 0) j["s_n"] = f.s_n;
  return j;
}

Dataset load_dataset(RunManifest& m, const std::string& curves_path, const std::string& table_path) {
  const CurveFile cf = parse_curves(m.read_input(curves_path), curves_path);
  const TableFile tf = parse_table(m.read_input(table_path), table_path);
  if (cf.X.rows() != tf.y.size())
    detail::fail(ErrorKind::invalid_argument, curves_path + " has " + std::to_string(cf.X.rows()) +
                                                  " curves but " + table_path + " has " +
                                                  std::to_string(tf.y.size()) + " rows");
  return Dataset{tf.y, cf.X, tf.Z, cf.grid};
}

class OutputDir {
 public:
  OutputDir(const std::string& dir, RunManifest& m) : dir_(dir), manifest_(m) { fs::create_directories(dir_); }

  std::ofstream open(const std::string& name) {
    const fs::path path = dir_ / name;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) detail::fail(ErrorKind::invalid_argument, "cannot write '" + path.string() + "'");
    manifest_.outputs.push_back(path.string());
    return os;
  }

  void write_manifest(const std::chrono::steady_clock::time_point& start) {
    manifest_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const fs::path path = dir_ / "manifest.json";
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) detail::fail(ErrorKind::invalid_argument, "cannot write '" + path.string() + "'");
    os << manifest_.to_json().dump(2) << '\n';
  }

 private:
  fs::path dir_;
  RunManifest& manifest_;
};

std::string na_or_real(double x) { return std::isfinite(x) ? format_real(x) : "NA"; }

void write_diagnostics(std::ostream& os, const RaplsFit& fit) {
  const FitDiagnostics& d = fit.diagnostics;
  os << "method " << fit.method << '\n'
     << "family " << to_string(fit.family) << '\n'
     << "p " << fit.p << '\n'
     << "n_iter " << fit.n_iter << '\n'
     << "converged " << (fit.converged ? "true" : "false") << '\n'
     << "loglik " << format_real(fit.loglik) << '\n'
     << "aic " << format_real(fit.aic) << '\n'
     << "gram_condition " << na_or_real(d.gram_condition) << '\n'
     << "hankel_deviation " << na_or_real(d.hankel_deviation) << '\n'
     << "annihilator_residual " << na_or_real(d.annihilator_residual) << '\n'
     << "eta_overflow " << (d.eta_overflow ? "true" : "false") << '\n'
     << "sigma2 " << na_or_real(d.sigma2) << '\n'
     << "loglik_trace";
  for (double v : d.loglik_trace) os << ' ' << format_real(v);
  os << '\n';
}

void write_estimates(std::ostream& os, const RaplsFit& fit, const std::optional<CalibratedFit>& cal) {
  os << "parameter estimate std_error\n";
  os << "alpha0 " << format_real(fit.alpha0) << " NA\n";
  for (Index k = 0; k < fit.alpha.size(); ++k)
    os << "alpha" << (k + 1) << ' ' << format_real(fit.alpha[k]) << " NA\n";
  if (cal)
    for (Index k = 0; k < cal->alpha_cal.size(); ++k)
      os << "alpha" << (k + 1) << "_cal " << format_real(cal->alpha_cal[k]) << ' '
         << format_real(cal->std_errors[k]) << '\n';
}

void write_selection(std::ostream& os, const SelectionResult& sel) {
  os << "p aic\n";
  for (const auto& [p, a] : sel.aic_curve) os << p << ' ' << format_real(a) << '\n';
}

json selection_json(const SelectionResult& sel) {
  json j{{"best_p", sel.best_p}, {"fits_considered", sel.fits_considered}};
  if (sel.truncated_at) j["truncated_at"] = *sel.truncated_at;
  j["failures"] = json::array();
  for (const auto& f : sel.failures)
    j["failures"].push_back({{"p", f.p}, {"error", std::string(to_string(f.kind))}, {"message", f.message}});
  return j;
}

// Fit at --p or by --select-p; fills manifest results.
RaplsFit fit_from_flags(const Dataset& d, const FitFlags& f, RunManifest& m, std::optional<SelectionResult>& sel) {
  const ExpFamily fam = parse_family(f.family);
  const Method method = parse_method(f.method);
  FitConfig cfg = fit_config(f);
  if ((f.p > 0) == (f.select_p > 0)) detail::fail(ErrorKind::invalid_argument, "give exactly one of --p or --select-p");
  if (f.p > 0) {
    cfg.p = f.p;
    RaplsFit fit = fit_method(d, fam, cfg, method);
    m.results["p"] = fit.p;
    return fit;
  }
  sel = select_p(d, fam, f.select_p, cfg, method);
  m.results["selection"] = selection_json(*sel);
  m.results["best_p"] = sel->best_p;
  m.results["p"] = sel->best_p;
  return *sel->best_fit;
}

int cmd_fit(const FitFlags& f, std::ostream& out, bool calibrate_only) {
  const auto start = std::chrono::steady_clock::now();
  RunManifest m;
  m.command = calibrate_only ? "calibrate" : "fit";
  m.config = config_json(f);
  const Dataset d = load_dataset(m, f.curves, f.table);
  std::optional<SelectionResult> sel;
  const RaplsFit fit = fit_from_flags(d, f, m, sel);
  std::optional<CalibratedFit> cal;
  if (f.calibrate || calibrate_only) cal = calibrate(d, parse_family(f.family), fit, f.s_n);

  OutputDir dir(f.out, m);
  if (!calibrate_only) {
    auto bs = dir.open("b_hat.txt");
    write_function(bs, fit.b_hat);
  }
  {
    auto es = dir.open("estimates.txt");
    write_estimates(es, fit, cal);
  }
  {
    auto ds = dir.open("diagnostics.txt");
    write_diagnostics(ds, fit);
  }
  if (sel) {
    auto ss = dir.open("selection.txt");
    write_selection(ss, *sel);
  }
  m.results["converged"] = fit.converged;
  m.results["n_iter"] = fit.n_iter;
  dir.write_manifest(start);
  out << m.command << ": p=" << fit.p << " n_iter=" << fit.n_iter << " loglik=" << format_real(fit.loglik) << '\n';
  return kExitOk;
}

int cmd_select(const FitFlags& f, int p_max, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  RunManifest m;
  m.command = "select";
  m.config = config_json(f);
  m.config["p_max"] = p_max;
  const Dataset d = load_dataset(m, f.curves, f.table);
  const SelectionResult sel = select_p(d, parse_family(f.family), p_max, fit_config(f), parse_method(f.method));
  m.results = selection_json(sel);
  OutputDir dir(f.out, m);
  {
    auto ss = dir.open("selection.txt");
    write_selection(ss, sel);
  }
  dir.write_manifest(start);
  out << "select: best_p=" << sel.best_p << '\n';
  return kExitOk;
}

int cmd_fpca(const std::string& curves, int n_comp, const std::string& out_dir, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  RunManifest m;
  m.command = "fpca";
  m.config = {{"curves", curves}, {"n_comp", n_comp}};
  const CurveFile cf = parse_curves(m.read_input(curves), curves);
  const EigenSystem es = fpca(cf.X, cf.grid, n_comp);
  m.results = {{"rank", es.rank}};
  OutputDir dir(out_dir, m);
  {
    auto os = dir.open("eigenvalues.txt");
    os << "component eigenvalue\n";
    for (int j = 0; j < es.size(); ++j) os << (j + 1) << ' ' << format_real(es.eigenvalues[j]) << '\n';
  }
  {
    auto os = dir.open("eigenfunctions.txt");
    os << 's';
    for (int j = 0; j < es.size(); ++j) os << " e" << (j + 1);
    os << '\n';
    const Vector& s = cf.grid->points();
    for (Index k = 0; k < s.size(); ++k) {
      os << format_real(s[k]);
      for (int j = 0; j < es.size(); ++j) os << ' ' << format_real(es.eigenfunctions[j][k]);
      os << '\n';
    }
  }
  dir.write_manifest(start);
  out << "fpca: " << es.size() << " components, rank " << es.rank << '\n';
  return kExitOk;
}

int cmd_simulate(const std::string& config, std::uint64_t seed, std::optional<int> reps, unsigned threads,
                 const std::string& out_dir, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  RunManifest m;
  m.command = "simulate";
  SimConfig cfg = parse_sim_config(m.read_input(config));
  cfg.base_seed = seed;
  if (reps) cfg.reps = *reps;
  cfg.validate();
  m.config = json::parse(sim_config_json(cfg));
  m.config["config_file"] = config;
  const ExperimentResult res = run_experiment(cfg, threads);
  m.results = {{"records", res.records.size()}, {"failures", res.failures.size()}};
  OutputDir dir(out_dir, m);
  {
    auto os = dir.open("records.csv");
    write_records(os, res);
  }
  {
    auto os = dir.open("summary.json");
    write_summary(os, res);
  }
  dir.write_manifest(start);
  for (const auto& s : res.summary)
    out << "simulate: " << to_string(s.method) << " reps=" << s.count << " mean_mse_b=" << format_real(s.mean_mse_b)
        << " mean_mse_alpha=" << format_real(s.mean_mse_alpha) << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Residual-based partial least squares for functional regression"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  FitFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "Fit a model and write the coefficient function");
  add_data_flags(fit, fit_flags);
  add_model_flags(fit, fit_flags);
  add_p_flags(fit, fit_flags);
  fit->add_flag("--calibrate", fit_flags.calibrate, "Calibrate the scalar coefficients");
  fit->add_option("--s-n", fit_flags.s_n, "Calibration truncation (default ceil(2 n^{1/4}))");

  FitFlags sel_flags;
  int p_max = 0;
  auto* sel = app.add_subcommand("select", "Choose the number of components by AIC");
  add_data_flags(sel, sel_flags);
  add_model_flags(sel, sel_flags);
  sel->add_option("--p-max", p_max, "Largest number of components")->required();

  FitFlags cal_flags;
  auto* cal = app.add_subcommand("calibrate", "Fit and calibrate the scalar coefficients");
  add_data_flags(cal, cal_flags);
  add_model_flags(cal, cal_flags);
  add_p_flags(cal, cal_flags);
  cal->add_option("--s-n", cal_flags.s_n, "Calibration truncation (default ceil(2 n^{1/4}))");

  std::string fpca_curves;
  std::string fpca_out;
  int n_comp = 1;
  auto* fp = app.add_subcommand("fpca", "Functional principal components of a curve file");
  fp->add_option("--curves", fpca_curves, "Curve matrix file")->required();
  fp->add_option("--n-comp", n_comp, "Number of components")->required();
  fp->add_option("--out", fpca_out, "Output directory")->required();

  std::string sim_config;
  std::string sim_out;
  std::uint64_t sim_seed = 0;
  std::optional<int> sim_reps;
  unsigned threads = 0;
  auto* sim = app.add_subcommand("simulate", "Run a simulation experiment");
  sim->add_option("--config", sim_config, "Simulation configuration (JSON)")->required();
  sim->add_option("--seed", sim_seed, "Base seed")->required();
  sim->add_option("--reps", sim_reps, "Override the number of replications");
  sim->add_option("--threads", threads, "Worker threads (0 = all cores)");
  sim->add_option("--out", sim_out, "Output directory")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? e.what() : app.help()) << '\n';
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (*fit) return cmd_fit(fit_flags, out, false);
    if (*cal) return cmd_fit(cal_flags, out, true);
    if (*sel) return cmd_select(sel_flags, p_max, out);
    if (*fp) return cmd_fpca(fpca_curves, n_comp, fpca_out, out);
    if (*sim) return cmd_simulate(sim_config, sim_seed, sim_reps, threads, sim_out, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_input_error() ? kExitInput : kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitInput;
}

}  // namespace rapls::cli
