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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "paracheck/cli.hpp"
#include "paracheck/fault.hpp"
#include "paracheck/functional.hpp"
#include "paracheck/os_model.hpp"
#include "paracheck/util.hpp"
#include "paracheck/workload.hpp"

namespace paracheck {

namespace fs = std::filesystem;

namespace {

/// Missing inputs and unwritable outputs are usage errors.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path, std::string_view what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + std::string(what) + " '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw InputError("write failed for '" + path.string() + "'");
}

std::string snapshot(const SimConfig& cfg) {
  std::string s;
  for (const auto& [k, v] : config_entries(cfg)) {
    if (!s.empty()) s += ' ';
    s += k + '=' + v;
  }
  return s;
}

RunManifest manifest_for(std::string command, const SimConfig& cfg, std::string program) {
  RunManifest m;
  m.command = std::move(command);
  m.config_snapshot = snapshot(cfg);
  m.program = std::move(program);
  m.seed = cfg.seed;
  return m;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Writes each named body behind the manifest, which lists every output.
void emit(RunManifest m, const fs::path& dir,
          const std::vector<std::pair<std::string, std::string>>& files) {
  for (const auto& f : files) m.outputs.push_back((dir / f.first).string());
  const std::string header = m.header();
  for (const auto& [name, body] : files) write_file(dir / name, header + body);
}

std::string on_off(bool b) { return b ? "on" : "off"; }

}  // namespace

std::string RunManifest::header(bool with_timestamp) const {
  std::string s;
  s += "# tool: paracheck " + std::string(kToolVersion) + "\n";
  s += "# command: " + command + "\n";
  if (!config_snapshot.empty()) s += "# config: " + config_snapshot + "\n";
  if (!program.empty()) s += "# program: " + program + "\n";
  s += "# seed: " + std::to_string(seed) + "\n";
  std::string outs;
  for (const auto& o : outputs) outs += (outs.empty() ? "" : " ") + o;
  s += "# outputs: " + outs + "\n";
  if (with_timestamp) s += std::string(kTimestampPrefix) + " " + utc_timestamp() + "\n";
  return s;
}

SimConfig load_config(const CommonArgs& args) {
  SimConfig cfg;
  if (!args.config_path.empty()) cfg = parse_config(read_file(args.config_path, "config file"));
  for (const auto& o : args.overrides) apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

Program load_program(const CommonArgs& args, const SimConfig& config) {
  if (args.program_path.empty() == args.workload.empty()) {
    throw InputError("give exactly one of --program and --workload");
  }
  if (!args.program_path.empty()) {
    Program p = parse_program(read_file(args.program_path, "program file"));
    validate_targets(p);
    return p;
  }
  return gen_workload(suite_member(args.workload, args.length, args.loops, config.seed).mix);
}

std::string program_id(const CommonArgs& args) {
  if (!args.program_path.empty()) return args.program_path;
  return "suite:" + args.workload + " length=" + std::to_string(args.length) +
         " loops=" + std::to_string(args.loops);
}

int cmd_run(const CommonArgs& args, std::ostream& out) {
  const SimConfig cfg = load_config(args);
  const Program prog = load_program(args, cfg);
  const SimResult r = simulate(cfg, prog);

  std::string result = SimResult::csv_header() + "\n" + r.to_csv_row() + "\n";
  std::string stalls = "reason,cycles\n";
  for (std::size_t i = 0; i < kNumStallReasons; ++i) {
    const auto reason = static_cast<StallReason>(i);
    stalls += std::string(stall_name(reason)) + ',' + std::to_string(r.stall(reason)) + "\n";
  }
  emit(manifest_for("run", cfg, program_id(args)), args.out_dir,
       {{"result.csv", result}, {"stalls.csv", stalls}});
  out << r.to_text();
  return 0;
}

int cmd_sweep_littles(const CommonArgs& args, std::vector<std::uint32_t> counts,
                      std::ostream& out) {
  if (counts.empty()) throw InputError("--counts needs at least one value");
  if (std::any_of(counts.begin(), counts.end(), [](std::uint32_t c) { return c == 0; })) {
    throw InputError("--counts values must be >= 1");
  }
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());

  const SimConfig base = load_config(args);
  const Program prog = load_program(args, base);
  const FunctionalTrace trace = golden_trace(base, prog);
  const std::uint64_t baseline = baseline_run(base, trace);

  std::string csv = "n_littles,slowdown,stall_fabric,stall_starvation\n";
  for (std::uint32_t n : counts) {
    SimConfig cfg = base;
    cfg.n_littles = n;
    cfg.validate();
    const SimResult r = simulate(cfg, prog, trace, baseline);
    csv += std::to_string(n) + ',' + fixed6(r.slowdown) + ',' +
           std::to_string(r.stall(StallReason::FabricBackpressure)) + ',' +
           std::to_string(r.stall(StallReason::CheckerStarvation)) + "\n";
    out << "n_littles=" << n << " slowdown=" << fixed6(r.slowdown) << "\n";
  }
  emit(manifest_for("sweep-littles", base, program_id(args)), args.out_dir, {{"sweep.csv", csv}});
  return 0;
}

int cmd_compare_fabrics(const CommonArgs& args, std::ostream& out) {
  const SimConfig base = load_config(args);
  const Program prog = load_program(args, base);
  const FunctionalTrace trace = golden_trace(base, prog);
  const std::uint64_t baseline = baseline_run(base, trace);

  std::string csv =
      "fabric,slowdown,stall_fabric,stall_starvation,stall_extraction,fabric_stall_share\n";
  for (FabricKind kind : {FabricKind::baseline(), FabricKind::hmnoc()}) {
    SimConfig cfg = base;
    cfg.fabric = kind;
    cfg.validate();
    const SimResult r = simulate(cfg, prog, trace, baseline);
    const double share = r.checked_cycles == 0
                             ? 0.0
                             : static_cast<double>(r.stall(StallReason::FabricBackpressure)) /
                                   static_cast<double>(r.checked_cycles);
    csv += std::string(fabric_name(kind.variant)) + ',' + fixed6(r.slowdown) + ',' +
           std::to_string(r.stall(StallReason::FabricBackpressure)) + ',' +
           std::to_string(r.stall(StallReason::CheckerStarvation)) + ',' +
           std::to_string(r.stall(StallReason::StatusExtraction)) + ',' + fixed6(share) + "\n";
    out << fabric_name(kind.variant) << " slowdown=" << fixed6(r.slowdown) << "\n";
  }
  emit(manifest_for("compare-fabrics", base, program_id(args)), args.out_dir,
       {{"fabrics.csv", csv}});
  return 0;
}

int cmd_campaign(const CommonArgs& args, std::size_t n_faults, std::uint64_t seed,
                 bool all_targets, std::ostream& out) {
  if (n_faults == 0) throw InputError("--faults must be >= 1");
  const SimConfig cfg = load_config(args);
  const Program prog = load_program(args, cfg);
  const CampaignResult res =
      run_campaign(cfg, prog, n_faults, seed, all_targets ? TargetSet::All : TargetSet::Compared);

  std::string csv = faults_csv_header() + "\n";
  for (const FaultRecord& r : res.records) csv += fault_csv_row(r) + "\n";
  RunManifest m = manifest_for("campaign", cfg, program_id(args));
  m.command += " faults=" + std::to_string(n_faults) + " fault_seed=" + std::to_string(seed) +
               " targets=" + (all_targets ? "all" : "compared");
  const std::string summary = summary_text(res.summary);
  emit(m, args.out_dir, {{"faults.csv", csv}, {"summary.txt", summary}});
  out << summary;
  return 0;
}

int cmd_deadlock_suite(const DeadlockArgs& args, std::ostream& out) {
  if (!fs::is_directory(args.scenario_dir)) {
    throw InputError("scenario directory '" + args.scenario_dir + "' does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(args.scenario_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".scn") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InputError("no .scn files in '" + args.scenario_dir + "'");

  std::vector<Scenario> scenarios;
  for (const auto& f : files) {
    scenarios.push_back(parse_scenario(read_file(f.string(), "scenario"), f.stem().string()));
  }
  const std::vector<bool> lag_opts =
      args.lag_guard ? std::vector<bool>{*args.lag_guard} : std::vector<bool>{true, false};
  const std::vector<bool> io_opts =
      args.io_sync_guard ? std::vector<bool>{*args.io_sync_guard} : std::vector<bool>{true, false};

  std::string csv = "scenario,lag_guard,io_sync_guard,verdict\n";
  for (const Scenario& sc : scenarios) {
    for (bool lag : lag_opts) {
      for (bool io : io_opts) {
        const DeadlockVerdict v = run_scenario(sc, Guards{lag, io});
        const std::string row =
            sc.name + ',' + on_off(lag) + ',' + on_off(io) + ',' + std::string(v.label());
        csv += row + "\n";
        out << row;
        if (v.deadlock) out << " (" << v.wait_for << ")";
        out << "\n";
      }
    }
  }
  RunManifest m;
  m.command = "deadlock-suite";
  m.program = args.scenario_dir;
  emit(m, args.out_dir, {{"verdicts.csv", csv}});
  return 0;
}

int cmd_gen_workload(const GenArgs& args, std::ostream& out) {
  if (args.out_path.empty()) throw InputError("--out is required");
  RunManifest m;
  m.command = "gen-workload";
  m.seed = args.seed;
  if (args.suite) {
    if (!args.mix.empty()) throw InputError("--suite and --mix are exclusive");
    std::vector<std::pair<std::string, std::string>> files;
    for (const NamedWorkload& w : workload_suite(args.length, args.loops, args.seed)) {
      std::string body = "# mix: " + format_mix(w.mix) + "\n" + format_program(gen_workload(w.mix));
      files.emplace_back(w.name + ".asm", std::move(body));
      out << w.name << ".asm\n";
    }
    m.program = "suite length=" + std::to_string(args.length) + " loops=" + std::to_string(args.loops);
    emit(m, args.out_path, files);
    return 0;
  }
  if (args.mix.empty()) throw InputError("give --mix or --suite");
  InstrMix mix = parse_mix(args.mix);
  mix.length = args.length;
  mix.loop_count = args.loops;
  mix.seed = args.seed;
  const Program prog = gen_workload(mix);
  const fs::path path(args.out_path);
  m.program = format_mix(mix);
  m.outputs.push_back(path.string());
  write_file(path, m.header() + format_program(prog));
  out << path.string() << "\n";
  return 0;
}

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << "program error: " << e.what() << "\n";
    return 2;
  } catch (const WorkloadError& e) {
    err << "workload error: " << e.what() << "\n";
    return 2;
  } catch (const ScenarioError& e) {
    err << "scenario error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "simulation error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace paracheck
