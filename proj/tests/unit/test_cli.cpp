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

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "rapls/io.hpp"
#include "rapls/select.hpp"
#include "rapls/simbench.hpp"

using namespace rapls;
namespace fs = std::filesystem;

namespace {

const std::string kData = RAPLS_DATA_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "rapls");
  std::ostringstream out, err;
  const int code = rapls::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rapls_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) { return read_file(p.string()); }

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) v.push_back(l);
  return v;
}

Dataset toy(const std::string& table) {
  const CurveFile c = parse_curves(slurp(kData + "/toy_curves.txt"));
  const TableFile t = parse_table(slurp(kData + "/" + table));
  return Dataset{t.y, c.X, t.Z, c.grid};
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

const char* kTinyConfig =
    R"({"family":"gaussian","scenario":"I","n":40,"reps":3,"grid_points":64,)"
    R"("p_policy":{"kind":"fixed","p":2},"methods":["rapls","fpcr"]})";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("fit writes the coefficient function on the grid") {
    const fs::path out = scratch("fit");
    const Run r = invoke({"fit", "--curves", kData + "/toy_curves.txt", "--table", kData + "/toy_table.txt", "--family",
                       "gaussian", "--p", "2", "--out", out.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto b = lines(slurp(out / "b_hat.txt"));
    CHECK(b.size() == 31);
    CHECK(b.front() == "s value");
    const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(m["command"] == "fit");
    CHECK(m["inputs"].size() == 2);
    CHECK(m["inputs"][0]["sha256"].get<std::string>().size() == 64);
    CHECK(m["results"]["p"] == 2);
    CHECK(fs::exists(out / "estimates.txt"));
    CHECK(fs::exists(out / "diagnostics.txt"));

    // Values printed by the tool equal the library result bit for bit.
    const Dataset d = toy("toy_table.txt");
    FitConfig cfg;
    cfg.p = 2;
    const RaplsFit fit = fit_method(d, ExpFamily::gaussian, cfg, Method::rapls);
    for (Index j = 0; j < 30; ++j) {
      std::istringstream row(b[static_cast<std::size_t>(j) + 1]);
      std::string s, v;
      row >> s >> v;
      CHECK(std::strtod(v.c_str(), nullptr) == fit.b_hat[j]);
    }
  }

  TEST_CASE("poisson fit on non-integer outcomes is an input error") {
    const fs::path out = scratch("bad_outcome");
    const Run r = invoke({"fit", "--curves", kData + "/toy_curves.txt", "--table", kData + "/toy_table.txt", "--family",
                       "poisson", "--p", "1", "--out", out.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("invalid-outcome") != std::string::npos);
  }

  TEST_CASE("selection agrees with the library") {
    const fs::path out = scratch("select");
    const Run r = invoke({"fit", "--curves", kData + "/toy_curves.txt", "--table", kData + "/toy_counts.txt",
                       "--family", "poisson", "--select-p", "10", "--out", out.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
    const SelectionResult lib = select_p(toy("toy_counts.txt"), ExpFamily::poisson, 10, FitConfig{}, Method::rapls);
    CHECK(m["results"]["best_p"] == lib.best_p);
    CHECK(lines(slurp(out / "selection.txt")).size() == lib.aic_curve.size() + 1);
  }

  TEST_CASE("calibrate and fpca subcommands") {
    const fs::path out = scratch("calibrate");
    const Run r = invoke({"calibrate", "--curves", kData + "/toy_curves.txt", "--table", kData + "/toy_counts.txt",
                       "--family", "poisson", "--p", "1", "--s-n", "3", "--out", out.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(slurp(out / "estimates.txt").find("alpha1_cal") != std::string::npos);

    const fs::path fo = scratch("fpca");
    const Run f = invoke({"fpca", "--curves", kData + "/toy_curves.txt", "--n-comp", "3", "--out", fo.string()});
    REQUIRE_MESSAGE(f.code == 0, f.err);
    CHECK(lines(slurp(fo / "eigenvalues.txt")).size() == 4);
    CHECK(lines(slurp(fo / "eigenfunctions.txt")).size() == 31);
  }

  TEST_CASE("usage and input errors") {
    const fs::path dir = scratch("errors");
    const fs::path cfg = write_config(dir, kTinyConfig);
    CHECK(invoke({"simulate", "--config", cfg.string(), "--out", (dir / "o").string()}).code == 2);
    const fs::path bad = write_config(dir, R"({"family":"gaussian","scenario":"IV","n":40,"reps":1})");
    const Run r = invoke({"simulate", "--config", bad.string(), "--seed", "1", "--out", (dir / "o").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("scenario") != std::string::npos);
    CHECK(invoke({"fit", "--curves", "/nonexistent", "--table", "/nonexistent", "--p", "1", "--out",
               (dir / "o").string()})
              .code == 2);
    CHECK(invoke({"fit", "--curves", kData + "/toy_curves.txt", "--table", kData + "/toy_table.txt", "--out",
               (dir / "o").string()})
              .code == 2);
    CHECK(invoke({"frobnicate"}).code == 2);
  }

  TEST_CASE("numerical failures use their own exit code") {
    const fs::path out = scratch("numerical");
    const Run r = invoke({"fpca", "--curves", kData + "/toy_curves.txt", "--n-comp", "15", "--out", out.string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("rank-deficient") != std::string::npos);
  }

  TEST_CASE("simulation output is deterministic and matches the library") {
    const fs::path dir = scratch("simulate");
    const fs::path cfg = write_config(dir, kTinyConfig);
    const Run a = invoke({"simulate", "--config", cfg.string(), "--seed", "11", "--threads", "1", "--out",
                       (dir / "a").string()});
    const Run b = invoke({"simulate", "--config", cfg.string(), "--seed", "11", "--threads", "2", "--out",
                       (dir / "b").string()});
    REQUIRE_MESSAGE(a.code == 0, a.err);
    REQUIRE_MESSAGE(b.code == 0, b.err);
    CHECK(slurp(dir / "a" / "records.csv") == slurp(dir / "b" / "records.csv"));
    CHECK(slurp(dir / "a" / "summary.json") == slurp(dir / "b" / "summary.json"));

    SimConfig c = parse_sim_config(kTinyConfig);
    c.base_seed = 11;
    std::ostringstream csv;
    write_records(csv, run_experiment(c, 1));
    CHECK(csv.str() == slurp(dir / "a" / "records.csv"));
    CHECK(lines(csv.str()).size() == 7);
  }
}
