/*
 * Copyright 2026 The paracheck Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "paracheck/cli.hpp"
#include "paracheck/workload.hpp"

using namespace paracheck;
namespace fs = std::filesystem;

namespace {

const fs::path kSrc = PARACHECK_SOURCE_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in, p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// File content without comment lines.
std::string body(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.starts_with("#")) out += line + "\n";
  }
  return out;
}

/// File content without the timestamp line.
std::string stable(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.starts_with(kTimestampPrefix)) out += line + "\n";
  }
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("paracheck_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

CommonArgs sample_args(const fs::path& out) {
  CommonArgs a;
  a.program_path = (kSrc / "workloads" / "sample.asm").string();
  a.out_dir = out.string();
  return a;
}

int quiet(const std::function<int(std::ostream&)>& f, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int rc = guarded([&] { return f(out); }, err);
  if (err_text) *err_text = err.str();
  return rc;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("run writes result and stall tables matching the goldens") {
  const fs::path d = scratch("run");
  REQUIRE(quiet([&](std::ostream& o) { return cmd_run(sample_args(d), o); }) == 0);
  CHECK(body(d / "result.csv") == body(kSrc / "tests/golden/run_result.csv"));
  CHECK(body(d / "stalls.csv") == body(kSrc / "tests/golden/run_stalls.csv"));
  const std::string text = slurp(d / "result.csv");
  CHECK(text.starts_with("# tool: paracheck 0.1.0\n# command: run\n# config: commit_width=4 "));
  CHECK(text.find("# program: ") != std::string::npos);
  CHECK(text.find("# outputs: ") != std::string::npos);
  CHECK(text.find(std::string(kTimestampPrefix)) != std::string::npos);
}

TEST_CASE("other commands match their goldens") {
  const fs::path d = scratch("goldens");
  CHECK(quiet([&](std::ostream& o) {
          auto a = sample_args(d / "sweep");
          return cmd_sweep_littles(a, {4, 1, 2, 2}, o);
        }) == 0);
  CHECK(body(d / "sweep/sweep.csv") == body(kSrc / "tests/golden/sweep.csv"));
  CHECK(quiet([&](std::ostream& o) { return cmd_compare_fabrics(sample_args(d / "fab"), o); }) == 0);
  CHECK(body(d / "fab/fabrics.csv") == body(kSrc / "tests/golden/fabrics.csv"));
  CHECK(quiet([&](std::ostream& o) {
          return cmd_campaign(sample_args(d / "camp"), 60, 3, false, o);
        }) == 0);
  CHECK(body(d / "camp/faults.csv") == body(kSrc / "tests/golden/campaign_faults.csv"));
  CHECK(body(d / "camp/summary.txt") == body(kSrc / "tests/golden/campaign_summary.txt"));
  DeadlockArgs da;
  da.scenario_dir = (kSrc / "scenarios").string();
  da.out_dir = (d / "dl").string();
  CHECK(quiet([&](std::ostream& o) { return cmd_deadlock_suite(da, o); }) == 0);
  CHECK(body(d / "dl/verdicts.csv") == body(kSrc / "tests/golden/verdicts.csv"));
}

TEST_CASE("reruns are identical apart from the timestamp") {
  const fs::path d = scratch("rerun");
  auto once = [&] {
    REQUIRE(quiet([&](std::ostream& o) { return cmd_run(sample_args(d), o); }) == 0);
    REQUIRE(quiet([&](std::ostream& o) { return cmd_campaign(sample_args(d), 30, 1, true, o); }) == 0);
    return stable(d / "result.csv") + stable(d / "stalls.csv") + stable(d / "faults.csv") +
           stable(d / "summary.txt");
  };
  CHECK(once() == once());
}

TEST_CASE("exit codes") {
  const fs::path d = scratch("exit");
  std::string err;
  CommonArgs missing = sample_args(d);
  missing.program_path = (d / "nope.asm").string();
  CHECK(quiet([&](std::ostream& o) { return cmd_run(missing, o); }, &err) == 2);
  CHECK(err.find("nope.asm") != std::string::npos);

  CommonArgs bad_key = sample_args(d);
  bad_key.overrides = {"n_littles=many"};
  CHECK(quiet([&](std::ostream& o) { return cmd_run(bad_key, o); }, &err) == 2);
  CHECK(err.find("n_littles") != std::string::npos);

  CommonArgs bad_cfg = sample_args(d);
  bad_cfg.config_path = (d / "missing.cfg").string();
  CHECK(quiet([&](std::ostream& o) { return cmd_run(bad_cfg, o); }) == 2);

  CommonArgs both = sample_args(d);
  both.workload = "mixed-a";
  CHECK(quiet([&](std::ostream& o) { return cmd_run(both, o); }) == 2);

  CommonArgs unknown = sample_args(d);
  unknown.program_path.clear();
  unknown.workload = "no-such-workload";
  CHECK(quiet([&](std::ostream& o) { return cmd_run(unknown, o); }) == 2);

  std::ofstream(d / "broken.asm") << "frobnicate x1, x2\n";
  CommonArgs broken = sample_args(d);
  broken.program_path = (d / "broken.asm").string();
  CHECK(quiet([&](std::ostream& o) { return cmd_run(broken, o); }) == 2);

  CommonArgs capped = sample_args(d);
  capped.overrides = {"cycle_cap=50"};
  CHECK(quiet([&](std::ostream& o) { return cmd_run(capped, o); }, &err) == 3);

  CHECK(quiet([&](std::ostream& o) { return cmd_sweep_littles(sample_args(d), {}, o); }) == 2);
  CHECK(quiet([&](std::ostream& o) { return cmd_sweep_littles(sample_args(d), {0, 2}, o); }) == 2);
  CHECK(quiet([&](std::ostream& o) { return cmd_campaign(sample_args(d), 0, 1, false, o); }) == 2);

  fs::create_directories(d / "scn");
  std::ofstream(d / "scn" / "bad.scn") << "at 0 teleport\n";
  DeadlockArgs da;
  da.scenario_dir = (d / "scn").string();
  da.out_dir = d.string();
  CHECK(quiet([&](std::ostream& o) { return cmd_deadlock_suite(da, o); }) == 2);
  da.scenario_dir = (d / "absent").string();
  CHECK(quiet([&](std::ostream& o) { return cmd_deadlock_suite(da, o); }) == 2);

  GenArgs g;
  g.mix = "Div=1.5";
  g.out_path = (d / "x.asm").string();
  CHECK(quiet([&](std::ostream& o) { return cmd_gen_workload(g, o); }) == 2);
}

TEST_CASE("a config file is read and --set overrides it") {
  const fs::path d = scratch("cfg");
  std::ofstream(d / "c.cfg") << "n_littles = 2\nfabric = baseline\n";
  CommonArgs a = sample_args(d);
  a.config_path = (d / "c.cfg").string();
  CHECK(load_config(a).n_littles == 2);
  a.overrides = {"n_littles=6"};
  const SimConfig c = load_config(a);
  CHECK(c.n_littles == 6);
  CHECK(c.fabric.variant == FabricVariant::Baseline);
  // The shipped default file loads cleanly.
  CommonArgs def;
  def.config_path = (kSrc / "configs/default.cfg").string();
  CHECK(format_config(load_config(def)) == format_config(SimConfig{}));
}

TEST_CASE("fabric comparison and sweep rows are ordered") {
  const fs::path d = scratch("order");
  CommonArgs a;
  a.workload = "store-heavy";
  a.length = 2000;
  a.loops = 5;
  a.out_dir = d.string();
  REQUIRE(quiet([&](std::ostream& o) { return cmd_sweep_littles(a, {6, 2, 4}, o); }) == 0);
  std::istringstream s(body(d / "sweep.csv"));
  std::string line;
  std::getline(s, line);
  CHECK(line == "n_littles,slowdown,stall_fabric,stall_starvation");
  std::vector<double> slow;
  std::vector<int> n;
  while (std::getline(s, line)) {
    n.push_back(std::stoi(line.substr(0, line.find(','))));
    slow.push_back(std::stod(line.substr(line.find(',') + 1)));
  }
  CHECK(n == std::vector<int>{2, 4, 6});
  CHECK(slow[0] > 0);
  CHECK(slow[0] >= slow[1]);
  CHECK(slow[1] >= slow[2]);

  REQUIRE(quiet([&](std::ostream& o) { return cmd_compare_fabrics(a, o); }) == 0);
  std::istringstream f(body(d / "fabrics.csv"));
  std::getline(f, line);
  std::string b, h;
  std::getline(f, b);
  std::getline(f, h);
  CHECK(b.starts_with("baseline,"));
  CHECK(h.starts_with("hmnoc,"));
  auto slowdown = [](const std::string& row) {
    const auto c = row.find(',');
    return std::stod(row.substr(c + 1, row.find(',', c + 1) - c - 1));
  };
  CHECK(slowdown(b) >= slowdown(h));
}

TEST_CASE("deadlock suite with fixed guards") {
  const fs::path d = scratch("dl");
  DeadlockArgs da;
  da.scenario_dir = (kSrc / "scenarios").string();
  da.out_dir = d.string();
  da.lag_guard = true;
  da.io_sync_guard = false;
  REQUIRE(quiet([&](std::ostream& o) { return cmd_deadlock_suite(da, o); }) == 0);
  CHECK(body(d / "verdicts.csv") ==
        "scenario,lag_guard,io_sync_guard,verdict\n"
        "benign,on,off,Completed\n"
        "canonical,on,off,DeadlockDetected\n"
        "io-only,on,off,DeadlockDetected\n"
        "lag-only,on,off,Completed\n");
}

TEST_CASE("gen-workload writes parseable, reproducible programs") {
  const fs::path d = scratch("gen");
  GenArgs g;
  g.mix = "Div=0.3,IntAlu=0.6,Branch=0.1";
  g.length = 5000;
  g.seed = 7;
  g.out_path = (d / "a.asm").string();
  REQUIRE(quiet([&](std::ostream& o) { return cmd_gen_workload(g, o); }) == 0);
  g.out_path = (d / "b.asm").string();
  REQUIRE(quiet([&](std::ostream& o) { return cmd_gen_workload(g, o); }) == 0);
  CHECK(body(d / "a.asm") == body(d / "b.asm"));
  const Program p = parse_program(slurp(d / "a.asm"));
  const auto hist = class_histogram(p);
  const double div = static_cast<double>(hist[class_index(InstrClass::Div)]) / p.size();
  CHECK(div == doctest::Approx(0.3).epsilon(0.02 / 0.3));

  GenArgs s;
  s.suite = true;
  s.length = 1000;
  s.loops = 2;
  s.out_path = (d / "suite").string();
  REQUIRE(quiet([&](std::ostream& o) { return cmd_gen_workload(s, o); }) == 0);
  for (const char* name : {"alu-uniform", "load-heavy", "store-heavy", "div-heavy", "fp-heavy",
                           "branch-heavy", "mixed-a", "mixed-b"}) {
    CAPTURE(name);
    const fs::path f = d / "suite" / (std::string(name) + ".asm");
    REQUIRE(fs::exists(f));
    CHECK(slurp(f).find("# mix: ") != std::string::npos);
    CHECK_NOTHROW(parse_program(slurp(f)));
  }
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(d / "suite")) ++files;
  CHECK(files == 8);
}

}  // TEST_SUITE
