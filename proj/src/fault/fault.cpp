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

#include "paracheck/fault.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "paracheck/util.hpp"

namespace paracheck {

std::string_view target_name(FaultTarget t) {
  switch (t) {
    case FaultTarget::StatusReg: return "StatusReg";
    case FaultTarget::LogAddr: return "LogAddr";
    case FaultTarget::LogData: return "LogData";
    case FaultTarget::CsrData: return "CsrData";
    case FaultTarget::LsqWindow: return "LsqWindow";
  }
  return "?";
}

std::string_view detector_name(Detector d) {
  switch (d) {
    case Detector::None: return "None";
    case Detector::Parity: return "Parity";
    case Detector::MemCompare: return "MemCompare";
    case Detector::CsrCompare: return "CsrCompare";
    case Detector::RegCompare: return "RegCompare";
  }
  return "?";
}

std::uint64_t latency_bound(const SimConfig& config) {
  return config.timeout_instructions * config.little.worst_cycles() * config.clock_ratio +
         static_cast<std::uint64_t>(config.dc_buffer_entries + config.status_packets()) *
             config.clock_ratio;
}

TargetSpace target_space(const SimConfig& config, const Program& program,
                         const FunctionalTrace& trace) {
  EngineOptions opts;
  opts.record_logs = true;
  Engine engine(config, program, trace, opts);
  engine.run();
  TargetSpace space;
  space.logs = engine.forwarded_logs();
  for (const CheckpointRecord& c : engine.checkpoints()) {
    if (c.ercp_little != 0) space.checkpoints.push_back(c);
  }
  space.status_words = status_word_count(config.forwarded_csr_count);
  return space;
}

std::vector<FaultSpec> generate_faults(const TargetSpace& space, std::size_t n_faults,
                                       std::uint64_t seed, TargetSet set) {
  std::vector<std::size_t> all_logs(space.logs.size());
  std::iota(all_logs.begin(), all_logs.end(), 0);
  std::vector<std::size_t> stores;
  std::vector<std::size_t> consumed;  // load data and CSR data
  for (std::size_t i = 0; i < space.logs.size(); ++i) {
    if (space.logs[i].kind == LogKind::Store) {
      stores.push_back(i);
    } else {
      consumed.push_back(i);
    }
  }

  struct Class {
    FaultTarget target;
    const std::vector<std::size_t>* pool;
  };
  std::vector<std::size_t> cps(space.checkpoints.size());
  std::iota(cps.begin(), cps.end(), 0);
  std::vector<Class> classes;
  if (!cps.empty()) classes.push_back({FaultTarget::StatusReg, &cps});
  if (!all_logs.empty()) classes.push_back({FaultTarget::LogAddr, &all_logs});
  if (!stores.empty()) classes.push_back({FaultTarget::LogData, &stores});
  if (!all_logs.empty()) classes.push_back({FaultTarget::LsqWindow, &all_logs});
  if (set == TargetSet::All && !consumed.empty()) {
    classes.push_back({FaultTarget::CsrData, &consumed});
  }
  if (classes.empty()) return {};

  std::mt19937_64 rng(seed);
  std::vector<FaultSpec> out;
  out.reserve(n_faults);
  for (std::size_t i = 0; i < n_faults; ++i) {
    const Class& c = classes[rng() % classes.size()];
    const std::size_t pick = (*c.pool)[rng() % c.pool->size()];
    FaultSpec f;
    f.target = c.target;
    f.bit = static_cast<std::uint32_t>(rng() % 64);
    if (c.target == FaultTarget::StatusReg) {
      f.rcp_id = space.checkpoints[pick].rcp_id;
      f.reg = static_cast<std::uint32_t>(rng() % space.status_words);
      f.inject_at = InjectAt::OnCreate;
    } else {
      const LogEntry& e = space.logs[pick];
      f.seq = e.seq;
      // The consumed pool mixes load data and CSR data; name it by kind.
      if (c.target == FaultTarget::CsrData && e.kind == LogKind::Load) {
        f.target = FaultTarget::LogData;
      }
      f.inject_at = InjectAt::OnForward;
    }
    out.push_back(f);
  }
  return out;
}

namespace {

FaultRecord finish_record(const Engine& e, const FaultSpec& spec, std::size_t idx,
                          const SimConfig& config) {
  FaultRecord r;
  r.fault_idx = idx;
  r.spec = spec;
  r.reachable = e.fault() && e.fault()->fired;
  if (r.reachable) r.inject_cycle = e.fault()->inject_cycle;
  if (r.reachable && e.detection()) {
    r.detected = true;
    r.detector = e.detection()->detector;
    r.detect_cycle = e.detection()->cycle;
    r.latency_ns = static_cast<double>(r.detect_cycle - r.inject_cycle) * config.big_period_ns();
  }
  return r;
}

/// Seq of the commit that creates the targeted data.
std::int64_t trigger_seq(const FaultSpec& f, const TargetSpace& space) {
  if (f.target != FaultTarget::StatusReg) return static_cast<std::int64_t>(f.seq);
  for (const CheckpointRecord& c : space.checkpoints) {
    if (c.rcp_id == f.rcp_id) return c.big_seq;
  }
  return 0;
}

}  // namespace

FaultRecord run_fault(const SimConfig& config, const Program& program,
                      const FunctionalTrace& trace, const FaultSpec& spec) {
  EngineOptions opts;
  opts.stop_on_detect = true;
  Engine engine(config, program, trace, opts);
  engine.arm(spec);
  engine.run();
  return finish_record(engine, spec, 0, config);
}

CampaignResult run_campaign(const SimConfig& config, const Program& program,
                            std::size_t n_faults, std::uint64_t seed, TargetSet set) {
  if (n_faults == 0) throw std::invalid_argument("a campaign needs at least one fault");
  config.validate();
  const FunctionalTrace trace = golden_trace(config, program);
  const TargetSpace space = target_space(config, program, trace);
  const std::vector<FaultSpec> faults = generate_faults(space, n_faults, seed, set);

  CampaignResult out;
  out.records.resize(faults.size());
  std::vector<std::size_t> order(faults.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::int64_t> at(faults.size());
  for (std::size_t i = 0; i < faults.size(); ++i) at[i] = trigger_seq(faults[i], space);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return at[a] < at[b]; });

  // Every fault run is identical to the fault-free run until its target is
  // created, so each one starts from a snapshot of a shared fault-free run.
  EngineOptions opts;
  opts.stop_on_detect = true;
  Engine master(config, program, trace, opts);
  const std::uint64_t width = config.commit_width;
  for (std::size_t idx : order) {
    const auto target = static_cast<std::uint64_t>(std::max<std::int64_t>(0, at[idx]));
    while (!master.finished() && master.big().committed() + width <= target) {
      if (master.cycle() >= config.cycle_cap) throw SimulationError("campaign exceeded cycle cap");
      master.clock_step();
    }
    Engine run = master;
    run.arm(faults[idx]);
    run.run();
    out.records[idx] = finish_record(run, faults[idx], idx, config);
  }
  out.summary = summarize(out.records, config);
  return out;
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

CampaignSummary summarize(const std::vector<FaultRecord>& records, const SimConfig& config) {
  CampaignSummary s;
  s.faults = records.size();
  std::vector<double> lat;
  for (const FaultRecord& r : records) {
    if (!r.detected) continue;
    ++s.detected;
    lat.push_back(r.latency_ns);
    s.max_cycles = std::max(s.max_cycles, r.latency_cycles());
  }
  std::sort(lat.begin(), lat.end());
  s.detection_rate = s.faults ? static_cast<double>(s.detected) / static_cast<double>(s.faults) : 0;
  if (!lat.empty()) {
    s.mean_ns = std::accumulate(lat.begin(), lat.end(), 0.0) / static_cast<double>(lat.size());
    s.p50_ns = quantile(lat, 0.50);
    s.p99_ns = quantile(lat, 0.99);
    s.p999_ns = quantile(lat, 0.999);
    s.max_ns = lat.back();
  }
  s.bound_cycles = latency_bound(config);
  return s;
}

std::string faults_csv_header() {
  return "fault_idx,target,seq,bit,detected,detector,inject_cycle,detect_cycle,latency_ns";
}

std::string fault_csv_row(const FaultRecord& r) {
  const std::uint64_t seq = r.spec.target == FaultTarget::StatusReg ? r.spec.rcp_id : r.spec.seq;
  std::string s;
  s += std::to_string(r.fault_idx) + ',';
  s += std::string(target_name(r.spec.target));
  if (r.spec.target == FaultTarget::StatusReg) s += ":r" + std::to_string(r.spec.reg);
  s += ',' + std::to_string(seq) + ',';
  s += std::to_string(r.spec.bit) + ',';
  s += std::string(r.detected ? "1" : "0") + ',';
  s += std::string(r.reachable ? detector_name(r.detector) : "Unreachable") + ',';
  s += std::to_string(r.inject_cycle) + ',';
  s += std::to_string(r.detect_cycle) + ',';
  s += std::to_string(std::llround(r.latency_ns));
  return s;
}

std::string summary_text(const CampaignSummary& s) {
  std::string out;
  auto kv = [&](std::string_view k, const std::string& v) {
    out += std::string(k) + " = " + v + "\n";
  };
  kv("faults", std::to_string(s.faults));
  kv("detected", std::to_string(s.detected));
  kv("detection_rate", fixed6(s.detection_rate));
  kv("mean_latency_ns", std::to_string(std::llround(s.mean_ns)));
  kv("p50_latency_ns", std::to_string(std::llround(s.p50_ns)));
  kv("p99_latency_ns", std::to_string(std::llround(s.p99_ns)));
  kv("p99.9_latency_ns", std::to_string(std::llround(s.p999_ns)));
  kv("max_latency_ns", std::to_string(std::llround(s.max_ns)));
  kv("max_latency_cycles", std::to_string(s.max_cycles));
  kv("latency_bound_cycles", std::to_string(s.bound_cycles));
  return out;
}

}  // namespace paracheck
