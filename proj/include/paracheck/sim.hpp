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
 * @file sim.hpp
 * @brief Simulation configuration, the cycle loop and its results.
 *
 * One Engine owns a big core, the fabric, the little cores and the OS
 * bookkeeping for a single program. Each big-core cycle runs, in order: big
 * commit, DEU enqueue, and on little ticks the fabric cycle and every little
 * core's check cycle, then OS events (checker release and dispatch).
 */

#ifndef PARACHECK_SIM_HPP
#define PARACHECK_SIM_HPP

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "paracheck/big_core.hpp"
#include "paracheck/fabric.hpp"
#include "paracheck/fault_spec.hpp"
#include "paracheck/functional.hpp"
#include "paracheck/little_core.hpp"
#include "paracheck/os_model.hpp"
#include "paracheck/program.hpp"

namespace paracheck {

/// Static area constants, reported only.
struct AreaTable {
  double rocket_mm2 = 0.092;
  /// Wrapper area for four little cores; one quarter is charged per core.
  double wrapper_mm2 = 0.059;
  double boom_mm2 = 2.811;
  double fabric_mm2 = 0.122;

  double per_little_mm2() const { return rocket_mm2 + wrapper_mm2 / 4.0; }
};

struct SimConfig {
  std::uint32_t commit_width = 4;
  std::uint32_t n_littles = 4;
  std::uint64_t lsl_capacity_bytes = 4096;
  std::uint64_t timeout_instructions = 5000;
  FabricKind fabric = FabricKind::hmnoc();
  std::uint32_t dc_buffer_entries = 16;
  std::uint32_t clock_ratio = 2;
  double big_clock_ghz = 3.2;
  LittleTiming little;
  CommitCosts costs = CommitCosts::defaults();
  std::uint32_t regs_per_packet = 4;
  std::uint32_t prf_read_ports = 2;
  std::uint32_t forwarded_csr_count = 2;
  std::uint64_t seed = 1;
  Guards guards;
  AreaTable area;
  std::uint32_t fabric_delay = 2;
  std::uint64_t kernel_cycles = 500;
  bool count_drain = true;
  std::uint64_t cycle_cap = 500'000'000;
  std::uint64_t memory_bytes = 65536;
  std::uint64_t max_instrs = 50'000'000;

  void validate() const;
  double big_period_ns() const { return 1.0 / big_clock_ghz; }
  /// Status words per packet after the fabric's payload width is applied.
  std::uint32_t words_per_packet() const;
  std::uint32_t status_packets() const;
  /// Runtime-log bytes one segment may use so that SRCP, log and ERCP always
  /// fit in the destination LSL together.
  std::uint64_t segment_log_budget() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` text with `#` comments.
SimConfig parse_config(std::string_view text, SimConfig base = {});
void apply_override(SimConfig& cfg, std::string_view key, std::string_view value);
/// "key=value" form used by --set.
void apply_override(SimConfig& cfg, std::string_view assignment);
/// Every key in a stable order, one `key = value` per line.
std::string format_config(const SimConfig& cfg);
std::vector<std::pair<std::string, std::string>> config_entries(const SimConfig& cfg);

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class StallReason : std::uint8_t { FabricBackpressure, CheckerStarvation, StatusExtraction };
inline constexpr std::size_t kNumStallReasons = 3;
std::string_view stall_name(StallReason r);

struct SimResult {
  std::uint64_t baseline_cycles = 0;
  std::uint64_t checked_cycles = 0;
  std::uint64_t drain_cycles = 0;
  std::uint64_t committed = 0;
  double slowdown = 0.0;
  std::array<std::uint64_t, kNumStallReasons> stalls{};
  std::uint64_t segments = 0;
  double mean_segment_length = 0.0;
  std::uint64_t packets_accepted = 0;
  std::uint64_t packets_delivered = 0;
  std::uint64_t packets_in_flight = 0;
  std::vector<double> checker_utilization;
  std::uint64_t mismatches = 0;
  std::uint64_t lag_violations = 0;
  std::optional<double> perf_per_area;

  std::uint64_t stall(StallReason r) const { return stalls[static_cast<std::size_t>(r)]; }
  std::uint64_t stall_total() const;
  /// Structured text record, stable key order.
  std::string to_text() const;
  static std::string csv_header();
  std::string to_csv_row() const;
};

struct Detection {
  Detector detector = Detector::None;
  std::uint32_t little = 0;
  std::uint64_t cycle = 0;
  VerifyResult result;
};

struct ArmedFault {
  FaultSpec spec;
  bool fired = false;
  std::uint64_t inject_cycle = 0;
};

struct CheckpointRecord {
  std::uint64_t rcp_id = 0;
  RcpTrigger trigger = RcpTrigger::CheckEnable;
  std::int64_t big_seq = -1;
  /// Little core that compares this checkpoint as an ERCP (0 if none).
  std::uint32_t ercp_little = 0;
};

struct SegmentRecord {
  std::uint64_t id = 0;
  std::uint32_t little = 0;
  std::uint64_t srcp_rcp_id = 0;
  std::int64_t start_seq = -1;
  std::int64_t end_seq = -1;
  bool closed = false;
  bool verified = false;
  Outcome outcome = Outcome::Match;
};

struct EngineOptions {
  bool record_events = false;
  bool record_logs = false;
  bool stop_on_detect = false;
};

class Engine {
 public:
  Engine(const SimConfig& config, const Program& program, const FunctionalTrace& trace,
         EngineOptions options = {});

  void arm(const FaultSpec& spec) { fault_ = ArmedFault{spec, false, 0}; }
  void clock_step();
  bool finished() const { return finished_; }
  /// Steps to completion. Throws SimulationError past the cycle cap.
  void run();
  SimResult result(std::uint64_t baseline_cycles) const;

  std::uint64_t cycle() const { return cycle_; }
  std::uint64_t little_cycles() const { return little_cycle_; }
  const BigCore& big() const { return big_; }
  const Fabric& fabric() const { return fabric_; }
  const LittleCore& little(std::uint32_t id) const { return littles_.at(id - 1); }
  const HookTable& hooks() const { return hooks_; }
  const std::optional<Detection>& detection() const { return detection_; }
  const std::optional<ArmedFault>& fault() const { return fault_; }
  const std::vector<std::string>& events() const { return events_; }
  const std::vector<CheckpointRecord>& checkpoints() const { return checkpoints_; }
  const std::vector<SegmentRecord>& segments() const { return segments_; }
  const std::vector<LogEntry>& forwarded_logs() const { return logs_; }
  std::uint64_t lag_violations() const { return lag_violations_; }
  std::uint64_t mismatches() const { return mismatches_; }
  std::uint64_t stall(StallReason r) const { return stalls_[static_cast<std::size_t>(r)]; }

 private:
  enum class Phase : std::uint8_t { Running, Extracting, WaitingChecker, Kernel, Done };
  enum class After : std::uint8_t { Running, WaitingChecker, Kernel, Done };

  struct PendingStatus {
    StatusPacket packet;
    std::vector<std::uint32_t> dests;
  };

  void big_step();
  void little_step();
  void os_step();
  void handle_rcp(const Checkpoint& cp);
  void queue_status(const Checkpoint& cp, std::vector<std::uint32_t> dests, After after,
                    bool injectable);
  void extract_step();
  void leave_kernel();
  bool try_open_segment();
  void start_segment(std::uint32_t little, std::uint64_t srcp_rcp, std::int64_t start_seq);
  void forward_log(LogEntry e, std::uint32_t path);
  void detect(Detector d, std::uint32_t little, const VerifyResult& r);
  void count_stall(StallReason r) { ++stalls_[static_cast<std::size_t>(r)]; }
  void log_event(std::string text);
  bool drained() const;

  const SimConfig* config_;
  const Program* program_;
  EngineOptions options_;
  BigCore big_;
  Fabric fabric_;
  std::vector<LittleCore> littles_;
  HookTable hooks_;
  CheckerRegistry registry_;

  Phase phase_ = Phase::Running;
  After after_extract_ = After::Running;
  std::deque<PendingStatus> pending_status_;
  std::uint32_t status_rr_ = 0;
  /// Checkpoint whose SRCP copy still needs a checker, or a request to open
  /// a fresh segment when empty.
  std::optional<Checkpoint> pending_srcp_;
  std::uint64_t kernel_left_ = 0;
  std::uint32_t current_little_ = 0;
  std::size_t current_segment_ = 0;
  std::vector<std::size_t> segment_on_little_;

  std::uint64_t cycle_ = 0;
  std::uint64_t little_cycle_ = 0;
  std::optional<std::uint64_t> big_done_cycle_;
  bool finished_ = false;
  std::array<std::uint64_t, kNumStallReasons> stalls_{};
  std::vector<std::uint64_t> lsl_free_;
  std::vector<std::uint32_t> freed_;

  std::optional<ArmedFault> fault_;
  std::optional<Detection> detection_;
  std::uint64_t mismatches_ = 0;
  std::uint64_t lag_violations_ = 0;
  std::vector<std::string> events_;
  std::vector<CheckpointRecord> checkpoints_;
  std::vector<SegmentRecord> segments_;
  std::vector<LogEntry> logs_;
};

/// Big-core cycles for the same program with checking disabled.
std::uint64_t baseline_run(const SimConfig& config, const FunctionalTrace& trace);
std::uint64_t baseline_run(const SimConfig& config, const Program& program);

/// Runs the program functionally on the configured memory image.
FunctionalTrace golden_trace(const SimConfig& config, const Program& program);

SimResult simulate(const SimConfig& config, const Program& program);
SimResult simulate(const SimConfig& config, const Program& program, const FunctionalTrace& trace,
                   std::uint64_t baseline_cycles);

double perf_per_area(const SimResult& result, const SimConfig& config);

}  // namespace paracheck

#endif  // PARACHECK_SIM_HPP
