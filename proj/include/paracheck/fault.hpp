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
 * @file fault.hpp
 * @brief Single-bit fault injection into forwarded data and randomized
 *        campaigns measuring detection latency.
 */

#ifndef PARACHECK_FAULT_HPP
#define PARACHECK_FAULT_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "paracheck/fault_spec.hpp"
#include "paracheck/sim.hpp"

namespace paracheck {

struct FaultRecord {
  std::size_t fault_idx = 0;
  FaultSpec spec;
  /// False when the target never appeared in the run.
  bool reachable = true;
  bool detected = false;
  Detector detector = Detector::None;
  std::uint64_t inject_cycle = 0;
  std::uint64_t detect_cycle = 0;
  double latency_ns = 0.0;

  std::uint64_t latency_cycles() const { return detect_cycle - inject_cycle; }
};

struct CampaignSummary {
  std::size_t faults = 0;
  std::size_t detected = 0;
  double detection_rate = 0.0;
  double mean_ns = 0.0;
  double p50_ns = 0.0;
  double p99_ns = 0.0;
  double p999_ns = 0.0;
  double max_ns = 0.0;
  std::uint64_t max_cycles = 0;
  std::uint64_t bound_cycles = 0;
};

/// Which targets a campaign draws from. Compared covers the fields the
/// checker compares directly (log addresses, store data, checkpoints that
/// have an ERCP consumer, the LSQ parity window). All adds load data and CSR
/// data, which the checker consumes rather than compares.
enum class TargetSet : std::uint8_t { Compared, All };

/// Valid injection sites of one fault-free run.
struct TargetSpace {
  std::vector<LogEntry> logs;
  std::vector<CheckpointRecord> checkpoints;
  std::uint32_t status_words = 0;
};

struct CampaignResult {
  std::vector<FaultRecord> records;
  CampaignSummary summary;
};

/// Worst-case detection latency in big cycles: a full timeout segment at the
/// slowest little-core instruction rate, plus draining one DC buffer and one
/// serialized checkpoint.
std::uint64_t latency_bound(const SimConfig& config);

TargetSpace target_space(const SimConfig& config, const Program& program,
                         const FunctionalTrace& trace);

std::vector<FaultSpec> generate_faults(const TargetSpace& space, std::size_t n_faults,
                                       std::uint64_t seed, TargetSet set = TargetSet::Compared);

/// Runs one fault in a fresh simulation.
FaultRecord run_fault(const SimConfig& config, const Program& program,
                      const FunctionalTrace& trace, const FaultSpec& spec);

CampaignResult run_campaign(const SimConfig& config, const Program& program,
                            std::size_t n_faults, std::uint64_t seed,
                            TargetSet set = TargetSet::Compared);

/// Nearest-rank quantile of an ascending vector.
double quantile(const std::vector<double>& sorted, double q);
CampaignSummary summarize(const std::vector<FaultRecord>& records, const SimConfig& config);

std::string faults_csv_header();
std::string fault_csv_row(const FaultRecord& r);
std::string summary_text(const CampaignSummary& s);

}  // namespace paracheck

#endif  // PARACHECK_FAULT_HPP
