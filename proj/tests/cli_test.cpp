// Copyright 2026 The nvsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <sstream>

#include <doctest.h>

#include "nvsim/config.hpp"
#include "nvsim/fitting.hpp"
#include "nvsim/hamiltonian.hpp"
#include "nvsim/io.hpp"
#include "nvsim_cli/commands.hpp"
#include "support.hpp"

namespace nvsim::cli {
namespace {

namespace fs = std::filesystem;

struct Run {
  CommandResult result;
  std::string out;
  std::string err;
};

Run invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r{run(args, out, err), "", ""};
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::size_t file_count(const fs::path& dir) {
  if (!fs::exists(dir)) return 0;
  return static_cast<std::size_t>(std::distance(fs::recursive_directory_iterator(dir), {}));
}

TEST_CASE("simulate writes CSV to stdout or artifacts to a directory") {
  testing::TempDir dir("cli_sim");
  const auto sys = (dir.path() / "sys.cfg").string();
  write_file_atomic(sys, "nitrogen = n15\nb0_T = 0.039\ntheta_deg = 2.6\n");
  Run r = invoke({"simulate", "--system", sys, "--order", "2", "--tau", "0.25:0.35:12",
                  "--transition", "plus_one"});
  CHECK(r.result.exit_code == kExitOk);
  CHECK(r.out.rfind("tau_us,p\n", 0) == 0);
  CHECK(parse_trace_csv(r.out).x.size() == 12);

  const auto out = dir.path() / "run";
  r = invoke({"simulate", "--system", sys, "--protocol", "hahn", "--tau", "0.5:2.0:10", "--out",
              out.string()});
  CHECK(r.result.exit_code == kExitOk);
  CHECK(fs::exists(out / "trace.csv"));
  const Config meta = Config::parse(read_file(out / "metadata.txt"));
  CHECK(meta.get_string("protocol") == "hahn");
  CHECK(meta.has("t_pi_ns"));

  r = invoke({"simulate", "--system", sys, "--protocol", "rabi", "--tau", "0.0:0.05:10"});
  CHECK(r.result.exit_code == kExitOk);
  CHECK(r.out.rfind("t_us,p\n", 0) == 0);
}

TEST_CASE("invalid input exits with code 2 and writes nothing") {
  testing::TempDir dir("cli_bad");
  const auto sys = (dir.path() / "sys.cfg").string();
  write_file_atomic(sys, "nitrogen = n15\nb0_T = 0.039\n");
  const auto out = dir.path() / "out";
  const std::vector<std::vector<std::string>> cases = {
      {"simulate", "--system", sys, "--tau", "2.0:1.0:10", "--out", out.string()},
      {"simulate", "--system", sys, "--tau", "0.1:1.0:10", "--protocol", "cpmg", "--out",
       out.string()},
      {"simulate", "--system", (dir.path() / "missing.cfg").string(), "--out", out.string()},
      {"simulate", "--out", out.string()},
      {"simulate", "--system", sys, "--order", "-1", "--out", out.string()},
      {"dataset", "query", "--root", dir.path().string(), "--where", "colour = red"},
      {"frobnicate"},
  };
  for (const auto& args : cases) {
    CAPTURE(args[0]);
    const Run r = invoke(args);
    CHECK(r.result.exit_code == kExitInvalidInput);
    CHECK(r.err.find("error") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
  }
}

TEST_CASE("dataset build, query, reindex and compare") {
  testing::TempDir dir("cli_dataset");
  const auto grid = dir.path() / "grid.cfg";
  write_file_atomic(grid,
                    "isotope = n15\nb0_T = 0.031 0.039\ntheta_deg = 2.6\norder = 2\n"
                    "transition = plus_one\ntau_us = 0.2:0.6:64\n");
  const auto root = dir.path() / "store";
  Run r = invoke({"dataset", "build", "--grid", grid.string(), "--out", root.string(),
                  "--workers", "1"});
  CHECK(r.result.exit_code == kExitOk);
  CHECK(file_count(root / "records") == 2);

  r = invoke({"dataset", "query", "--root", root.string(), "--b0", "0.039"});
  CHECK(r.result.exit_code == kExitOk);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 2);
  r = invoke({"dataset", "query", "--root", root.string(), "--where", "b0_T < 0.035"});
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 2);

  fs::remove(root / "index.tsv");
  r = invoke({"dataset", "reindex", root.string()});
  CHECK(r.result.exit_code == kExitOk);
  CHECK(fs::exists(root / "index.tsv"));

  r = invoke({"dataset", "query", "--root", root.string()});
  const std::string id = r.out.substr(r.out.find('\n') + 1, 16);
  const std::string rec = read_file(root / "records" / (id + ".rec"));
  SweepTrace exp = parse_trace_csv(rec.substr(rec.find("tau_us,p")));
  for (double& v : exp.p) v = 2.0 * v + 1.0;
  write_file_atomic(dir.path() / "exp.csv", trace_to_csv(exp));
  r = invoke({"compare", "--exp", (dir.path() / "exp.csv").string(), "--root", root.string(),
              "--top", "1"});
  CHECK(r.result.exit_code == kExitOk);
  CHECK(r.out.find("1," + id + ",") != std::string::npos);
}

TEST_CASE("fit-hyperfine writes the best tensor") {
  testing::TempDir dir("cli_fit");
  const HyperfineComponents plant{0.5, -1.0, 0.5, 0.0, 0.5, 1.0};
  std::vector<EseemMeasurement> conditions;
  for (double b : {0.018, 0.031, 0.040}) {
    for (auto t : {Transition::kPlusOne, Transition::kMinusOne}) {
      conditions.push_back({b, 5.0, t, 0.0, 0.0, 1.0});
    }
  }
  EseemMeasurementSet set =
      synthesize_measurements(to_matrix(plant), conditions, NitrogenIsotope::kNone);
  set.zero_field_larmor = zero_field_larmor(to_matrix(plant));
  const auto csv = dir.path() / "m.csv";
  write_file_atomic(csv, measurements_to_csv(set));
  const auto out = dir.path() / "fit";
  const Run r = invoke({"fit-hyperfine", "--measurements", csv.string(), "--nitrogen", "none",
                        "--coarse-range", "1", "--coarse-step", "0.5", "--fine-step", "0.05",
                        "--fine-halfwidth", "0.25", "--workers", "1", "--out", out.string()});
  CHECK(r.result.exit_code == kExitOk);
  REQUIRE(fs::exists(out / "hyperfine.cfg"));
  CHECK(fs::exists(out / "report.csv"));
  const Config cfg = Config::parse(read_file(out / "hyperfine.cfg"));
  REQUIRE(cfg.has("target_hyperfine_MHz"));
  const auto got = cfg.get_doubles("target_hyperfine_MHz");
  REQUIRE(got.size() == 6);
  const HyperfineComponents mirror = mirror_image(plant);
  double err = 0.0, merr = 0.0;
  for (int k = 0; k < 6; ++k) {
    err = std::max(err, std::abs(got[k] - plant[k]));
    merr = std::max(merr, std::abs(got[k] - mirror[k]));
  }
  CHECK(std::min(err, merr) < 1e-9);

  const Run bad = invoke({"fit-hyperfine", "--measurements", csv.string(), "--coarse-step", "0.3",
                          "--fine-step", "0.07"});
  CHECK(bad.result.exit_code == kExitInvalidInput);
}

}  // namespace
}  // namespace nvsim::cli
