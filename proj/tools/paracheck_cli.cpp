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

#include <iostream>

#include "CLI11.hpp"
#include "paracheck/cli.hpp"

namespace {

void add_common(CLI::App* cmd, paracheck::CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "Config file (key = value)");
  cmd->add_option("--set", a.overrides, "Override a config key (key=value), repeatable");
  auto* prog = cmd->add_option("--program", a.program_path, "Program file");
  auto* wl = cmd->add_option("--workload", a.workload, "Named suite workload instead of a file");
  prog->excludes(wl);
  cmd->add_option("--length", a.length, "Static length of a suite workload");
  cmd->add_option("--loops", a.loops, "Loop count of a suite workload");
  cmd->add_option("--out", a.out_dir, "Output directory");
}

std::optional<bool> parse_guard(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (s == "on") return true;
  if (s == "off") return false;
  throw CLI::ValidationError("guard", "expected on or off, got '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace paracheck;
  CLI::App app{"paracheck: heterogeneous parallel error detection simulator"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  CommonArgs run_args;
  auto* run = app.add_subcommand("run", "Simulate one program");
  add_common(run, run_args);

  CommonArgs sweep_args;
  std::vector<std::uint32_t> counts{2, 4, 6};
  auto* sweep = app.add_subcommand("sweep-littles", "Slowdown across little-core counts");
  add_common(sweep, sweep_args);
  sweep->add_option("--counts", counts, "Little-core counts")->delimiter(',');

  CommonArgs fab_args;
  auto* fab = app.add_subcommand("compare-fabrics", "Baseline versus HM-NoC forwarding fabric");
  add_common(fab, fab_args);

  CommonArgs camp_args;
  std::size_t n_faults = 5000;
  std::uint64_t fault_seed = 1;
  bool all_targets = false;
  auto* camp = app.add_subcommand("campaign", "Randomized single-bit fault campaign");
  add_common(camp, camp_args);
  camp->add_option("--faults", n_faults, "Number of faults");
  camp->add_option("--seed", fault_seed, "Fault generator seed");
  camp->add_flag("--all-targets", all_targets, "Also flip load data and CSR data");

  DeadlockArgs dl_args;
  std::string lag, io;
  auto* dl = app.add_subcommand("deadlock-suite", "Run page-lock deadlock scenarios");
  dl->add_option("--scenarios", dl_args.scenario_dir, "Directory of .scn files")->required();
  dl->add_option("--lag-guard", lag, "on or off (default: both)");
  dl->add_option("--io-sync-guard", io, "on or off (default: both)");
  dl->add_option("--out", dl_args.out_dir, "Output directory");

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen-workload", "Generate a synthetic program");
  gen->add_option("--mix", gen_args.mix, "Class fractions, e.g. IntAlu=0.7,Load=0.3");
  gen->add_flag("--suite", gen_args.suite, "Generate the eight suite workloads into --out");
  gen->add_option("--out", gen_args.out_path, "Output file, or directory with --suite")->required();
  gen->add_option("--length", gen_args.length, "Static instruction count");
  gen->add_option("--loops", gen_args.loops, "Loop count");
  gen->add_option("--seed", gen_args.seed, "Generator seed");

  try {
    app.parse(argc, argv);
    dl_args.lag_guard = parse_guard(lag);
    dl_args.io_sync_guard = parse_guard(io);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  return guarded(
      [&]() -> int {
        if (*run) return cmd_run(run_args, std::cout);
        if (*sweep) return cmd_sweep_littles(sweep_args, counts, std::cout);
        if (*fab) return cmd_compare_fabrics(fab_args, std::cout);
        if (*camp) return cmd_campaign(camp_args, n_faults, fault_seed, all_targets, std::cout);
        if (*dl) return cmd_deadlock_suite(dl_args, std::cout);
        return cmd_gen_workload(gen_args, std::cout);
      },
      std::cerr);
}
