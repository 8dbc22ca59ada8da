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

/**
 * @file cli.hpp
 * @brief Command implementations behind the paracheck executable. Every
 *        command writes CSV files led by a commented run manifest.
 */

#ifndef PARACHECK_CLI_HPP
#define PARACHECK_CLI_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "paracheck/program.hpp"
#include "paracheck/sim.hpp"

namespace paracheck {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Inputs shared by the simulation commands.
struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  /// Exactly one of program_path and workload is set.
  std::string program_path;
  std::string workload;
  std::size_t length = 10000;
  std::uint64_t loops = 20;
  std::string out_dir = ".";
};

struct RunManifest {
  std::string command;
  std::string config_snapshot;
  std::string program;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;

  /// Comment lines; the timestamp line is the only nondeterministic one.
  std::string header(bool with_timestamp = true) const;
};

/// Marks lines a determinism comparison must skip.
inline constexpr std::string_view kTimestampPrefix = "# timestamp:";

SimConfig load_config(const CommonArgs& args);
/// Reads the program file or generates the named suite workload (seeded by
/// the config seed).
Program load_program(const CommonArgs& args, const SimConfig& config);
std::string program_id(const CommonArgs& args);

int cmd_run(const CommonArgs& args, std::ostream& out);
int cmd_sweep_littles(const CommonArgs& args, std::vector<std::uint32_t> counts,
                      std::ostream& out);
int cmd_compare_fabrics(const CommonArgs& args, std::ostream& out);
int cmd_campaign(const CommonArgs& args, std::size_t n_faults, std::uint64_t seed,
                 bool all_targets, std::ostream& out);

struct DeadlockArgs {
  std::string scenario_dir;
  std::string out_dir = ".";
  /// Unset guards sweep both settings.
  std::optional<bool> lag_guard;
  std::optional<bool> io_sync_guard;
};
int cmd_deadlock_suite(const DeadlockArgs& args, std::ostream& out);

struct GenArgs {
  std::string mix;
  std::string out_path;
  /// Writes the eight suite members into out_path as a directory.
  bool suite = false;
  std::size_t length = 10000;
  std::uint64_t loops = 20;
  std::uint64_t seed = 1;
};
int cmd_gen_workload(const GenArgs& args, std::ostream& out);

/// Runs a command and maps exceptions to exit codes: 2 for usage, config and
/// input errors, 3 for simulation failures.
int guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace paracheck

#endif  // PARACHECK_CLI_HPP
