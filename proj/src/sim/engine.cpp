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

#include <cstdio>
#include <limits>
#include <numeric>

#include "paracheck/sim.hpp"
#include "paracheck/util.hpp"

namespace paracheck {

namespace {

constexpr std::size_t kNoSegment = std::numeric_limits<std::size_t>::max();
constexpr std::uint32_t kBigCore = 0;

Detector detector_for(Outcome o) {
  switch (o) {
    case Outcome::RegMismatch: return Detector::RegCompare;
    case Outcome::MemMismatch: return Detector::MemCompare;
    case Outcome::CsrMismatch: return Detector::CsrCompare;
    case Outcome::Match: break;
  }
  return Detector::None;
}

}  // namespace

std::string_view stall_name(StallReason r) {
  switch (r) {
    case StallReason::FabricBackpressure: return "FabricBackpressure";
    case StallReason::CheckerStarvation: return "CheckerStarvation";
    case StallReason::StatusExtraction: return "StatusExtraction";
  }
  return "?";
}

Engine::Engine(const SimConfig& config, const Program& program, const FunctionalTrace& trace,
               EngineOptions options)
    : config_(&config),
      program_(&program),
      options_(options),
      big_(trace,
           DeuParams{config.commit_width, config.timeout_instructions,
                     config.segment_log_budget()},
           config.costs),
      fabric_(config.fabric, config.commit_width, config.dc_buffer_entries,
              config.fabric_delay) {
  config.validate();
  littles_.reserve(config.n_littles);
  std::vector<std::uint32_t> ids;
  for (std::uint32_t i = 1; i <= config.n_littles; ++i) {
    littles_.emplace_back(i, program, config.little, config.lsl_capacity_bytes,
                          config.forwarded_csr_count);
    ids.push_back(i);
  }
  segment_on_little_.assign(config.n_littles + 1, kNoSegment);
  lsl_free_.assign(config.n_littles + 1, 0);

  // The checked task is released with every little core as its checker.
  const Task idle{0, false, false, {}};
  const Task app{1, false, true, ids};
  context_switch_big(hooks_, kBigCore, idle, app);

  if (trace.empty()) {
    phase_ = Phase::Done;
    big_done_cycle_ = 0;
    finished_ = true;
  } else if (!try_open_segment()) {
    phase_ = Phase::WaitingChecker;
  }
}

void Engine::log_event(std::string text) {
  if (options_.record_events) events_.push_back("t=" + std::to_string(cycle_) + " " + text);
}

void Engine::run() {
  while (!finished_) {
    if (cycle_ >= config_->cycle_cap) {
      throw SimulationError("cycle cap of " + std::to_string(config_->cycle_cap) +
                            " big cycles exceeded");
    }
    clock_step();
  }
}

void Engine::clock_step() {
  if (finished_) return;
  big_step();
  if (cycle_ % config_->clock_ratio == 0) little_step();
  os_step();
  ++cycle_;
  if (!finished_ && phase_ == Phase::Done && drained()) finished_ = true;
}

bool Engine::drained() const {
  if (!pending_status_.empty() || fabric_.in_flight() != 0) return false;
  for (const LittleCore& l : littles_) {
    if (!l.free()) return false;
  }
  return true;
}

void Engine::big_step() {
  switch (phase_) {
    case Phase::Done: return;
    case Phase::Kernel:
      if (kernel_left_ > 0) --kernel_left_;
      if (kernel_left_ == 0) leave_kernel();
      return;
    case Phase::WaitingChecker: count_stall(StallReason::CheckerStarvation); return;
    case Phase::Extracting: extract_step(); return;
    case Phase::Running: break;
  }

  CommitBundle b = big_.commit_cycle(cycle_, fabric_.runtime_free_mask());
  for (std::size_t i = 0; i < b.log_entries.size(); ++i) {
    forward_log(b.log_entries[i], b.log_paths[i]);
  }
  if (b.retired.empty() && b.blocked_by_fabric) count_stall(StallReason::FabricBackpressure);

  if (b.rcp) {
    handle_rcp(*b.rcp);
  } else if (b.trap_retired) {
    big_.set_check_enabled(false);
    kernel_left_ = config_->kernel_cycles;
    phase_ = Phase::Kernel;
    if (kernel_left_ == 0) leave_kernel();
  } else if (big_.done()) {
    phase_ = Phase::Done;
    big_done_cycle_ = cycle_ + 1;
  }
}

void Engine::forward_log(LogEntry e, std::uint32_t path) {
  auto fire = [&](FaultTarget t, std::uint64_t seq) {
    if (!fault_ || fault_->fired || fault_->spec.target != t || fault_->spec.seq != seq) {
      return false;
    }
    fault_->fired = true;
    fault_->inject_cycle = cycle_;
    return true;
  };

  if (fire(FaultTarget::LsqWindow, e.seq)) e.data ^= fault_->spec.flip_mask();
  if (std::holds_alternative<ParityFault>(lsq_forward(e))) {
    VerifyResult r;
    r.outcome = Outcome::MemMismatch;
    r.field = MismatchField::Data;
    r.log_seq = e.seq;
    r.detect_cycle = cycle_;
    detect(Detector::Parity, 0, r);
  }
  if (fire(FaultTarget::LogAddr, e.seq)) e.address ^= fault_->spec.flip_mask();
  if (fire(FaultTarget::LogData, e.seq) || fire(FaultTarget::CsrData, e.seq)) {
    e.data ^= fault_->spec.flip_mask();
  }
  if (options_.record_logs) logs_.push_back(e);
  if (fabric_.enqueue(path, Packet::make_runtime(e, current_little_)) !=
      EnqueueResult::Accepted) {
    throw SimulationError("runtime packet rejected on a path reported free");
  }
}

void Engine::detect(Detector d, std::uint32_t little, const VerifyResult& r) {
  if (detection_) return;
  detection_ = Detection{d, little, cycle_, r};
  log_event("detect " + std::string(detector_name(d)) + " little=" + std::to_string(little) +
            " seq=" + std::to_string(r.log_seq));
  if (options_.stop_on_detect) finished_ = true;
}

void Engine::start_segment(std::uint32_t little, std::uint64_t srcp_rcp, std::int64_t start_seq) {
  SegmentRecord seg;
  seg.id = segments_.size();
  seg.little = little;
  seg.srcp_rcp_id = srcp_rcp;
  seg.start_seq = start_seq;
  segments_.push_back(seg);
  const CheckerThread& t = registry_.spawn(little, seg.id);
  littles_[little - 1].assign({seg.id, srcp_rcp, start_seq, t.tid});
  segment_on_little_[little] = seg.id;
  current_little_ = little;
  current_segment_ = seg.id;
  big_.deu().segment_open = true;
  log_event("dispatch seg=" + std::to_string(seg.id) + " little=" + std::to_string(little) +
            " srcp=" + std::to_string(srcp_rcp));
}

bool Engine::try_open_segment() {
  auto n = hooks_.dispatch_segment(kBigCore);
  if (!n) return false;
  Checkpoint cp = big_.open_segment();
  checkpoints_.push_back({cp.rcp_id, cp.trigger, cp.big_seq, 0});
  fabric_.set_epoch(cp.rcp_id);
  log_event("rcp id=" + std::to_string(cp.rcp_id) + " trigger=CheckEnable seq=" +
            std::to_string(cp.big_seq));
  start_segment(*n, cp.rcp_id, cp.big_seq);
  queue_status(cp, {*n}, After::Running, false);
  return true;
}

void Engine::handle_rcp(const Checkpoint& cp) {
  const std::uint32_t prev = current_little_;
  checkpoints_.push_back({cp.rcp_id, cp.trigger, cp.big_seq, prev});
  littles_[prev - 1].close_segment(cp.rcp_id, cp.big_seq);
  SegmentRecord& seg = segments_[current_segment_];
  seg.end_seq = cp.big_seq;
  seg.closed = true;
  fabric_.set_epoch(cp.rcp_id);
  log_event("rcp id=" + std::to_string(cp.rcp_id) + " trigger=" +
            std::string(trigger_name(cp.trigger)) + " seq=" + std::to_string(cp.big_seq));

  if (cp.trigger == RcpTrigger::KernelTrap) {
    queue_status(cp, {prev}, After::Kernel, true);
  } else if (cp.trigger == RcpTrigger::ProgramEnd || big_.done()) {
    queue_status(cp, {prev}, After::Done, true);
  } else if (auto n = hooks_.dispatch_segment(kBigCore)) {
    start_segment(*n, cp.rcp_id, cp.big_seq);
    queue_status(cp, {prev, *n}, After::Running, true);
  } else {
    // No free checker: send the ERCP now and the SRCP copy once one frees.
    pending_srcp_ = cp;
    queue_status(cp, {prev}, After::WaitingChecker, true);
  }
}

void Engine::queue_status(const Checkpoint& cp, std::vector<std::uint32_t> dests, After after,
                          bool injectable) {
  auto packets = extract_status_packets(cp, config_->words_per_packet(),
                                        config_->forwarded_csr_count);
  for (StatusPacket& p : packets) {
    if (injectable && fault_ && !fault_->fired && fault_->spec.target == FaultTarget::StatusReg &&
        fault_->spec.rcp_id == p.rcp_id && fault_->spec.reg >= p.first_word &&
        fault_->spec.reg < p.first_word + p.nwords) {
      p.words[fault_->spec.reg - p.first_word] ^= fault_->spec.flip_mask();
      fault_->fired = true;
      fault_->inject_cycle = cycle_;
    }
    pending_status_.push_back({p, dests});
  }
  after_extract_ = after;
  phase_ = Phase::Extracting;
}

void Engine::extract_step() {
  std::uint32_t sent = 0;
  bool blocked = false;
  while (sent < config_->prf_read_ports && !pending_status_.empty()) {
    const std::uint32_t path = status_rr_ % config_->commit_width;
    const PendingStatus& ps = pending_status_.front();
    if (fabric_.enqueue(path, Packet::make_status(ps.packet, ps.dests)) ==
        EnqueueResult::Rejected) {
      blocked = true;
      break;
    }
    pending_status_.pop_front();
    ++status_rr_;
    ++sent;
  }
  count_stall(sent == 0 && blocked ? StallReason::FabricBackpressure
                                   : StallReason::StatusExtraction);
  if (!pending_status_.empty()) return;

  switch (after_extract_) {
    case After::Running: phase_ = Phase::Running; break;
    case After::WaitingChecker: phase_ = Phase::WaitingChecker; break;
    case After::Kernel: {
      const Task app{1, false, false, {}};
      for (const ConfigEffect& fx : context_switch_big(hooks_, kBigCore, app, app)) {
        if (fx.kind == ConfigEffect::Kind::CheckDisable) big_.set_check_enabled(false);
      }
      kernel_left_ = config_->kernel_cycles;
      phase_ = Phase::Kernel;
      if (kernel_left_ == 0) leave_kernel();
      break;
    }
    case After::Done:
      phase_ = Phase::Done;
      big_done_cycle_ = cycle_ + 1;
      break;
  }
}

void Engine::leave_kernel() {
  big_.set_check_enabled(true);
  if (big_.done()) {
    phase_ = Phase::Done;
    big_done_cycle_ = cycle_ + 1;
  } else if (!try_open_segment()) {
    phase_ = Phase::WaitingChecker;
  }
}

void Engine::little_step() {
  for (std::uint32_t i = 0; i < littles_.size(); ++i) lsl_free_[i + 1] = littles_[i].lsl().free();
  for (Delivery& d : fabric_.cycle(lsl_free_)) {
    Lsl& lsl = littles_.at(d.dest - 1).lsl();
    if (d.packet.kind == PacketKind::Status) {
      lsl.push_status(d.packet.status());
    } else {
      lsl.push_runtime(d.packet.runtime());
    }
  }

  const CheckContext ctx{little_cycle_, big_.last_committed_seq(), config_->guards.lag};
  for (LittleCore& l : littles_) {
    const bool open = !l.free() && !l.segment_closed();
    const std::int64_t seq = l.next_seq();
    const CheckOutcome out = l.check_cycle(ctx);
    if (out.retired && open && seq >= ctx.big_last_seq) ++lag_violations_;
    const std::size_t si = segment_on_little_[l.id()];
    if (out.result && !out.result->match()) {
      ++mismatches_;
      if (si != kNoSegment) segments_[si].outcome = out.result->outcome;
      detect(detector_for(out.result->outcome), l.id(), *out.result);
    }
    if (out.segment_done) {
      if (si != kNoSegment) segments_[si].verified = true;
      freed_.push_back(l.id());
      log_event("verified seg=" + std::to_string(si) + " little=" + std::to_string(l.id()));
    }
  }
  ++little_cycle_;
}

void Engine::os_step() {
  for (std::uint32_t l : freed_) {
    registry_.finish(l);
    hooks_.set_free(l, true);
    segment_on_little_[l] = kNoSegment;
  }
  freed_.clear();
  if (phase_ != Phase::WaitingChecker) return;
  if (pending_srcp_) {
    if (auto n = hooks_.dispatch_segment(kBigCore)) {
      const Checkpoint cp = *pending_srcp_;
      pending_srcp_.reset();
      start_segment(*n, cp.rcp_id, cp.big_seq);
      queue_status(cp, {*n}, After::Running, false);
    }
  } else {
    try_open_segment();
  }
}

SimResult Engine::result(std::uint64_t baseline_cycles) const {
  if (fabric_.accepted() != fabric_.delivered() + fabric_.in_flight()) {
    throw SimulationError("fabric conservation violated");
  }
  SimResult r;
  const bool complete = finished_ && !(options_.stop_on_detect && detection_);
  if (complete) {
    if (fabric_.in_flight() != 0) throw SimulationError("packets left in flight after drain");
    for (const SegmentRecord& s : segments_) {
      if (!s.verified) throw SimulationError("segment " + std::to_string(s.id) + " unverified");
    }
  }
  const std::uint64_t big_done = big_done_cycle_.value_or(cycle_);
  r.baseline_cycles = baseline_cycles;
  r.checked_cycles = config_->count_drain ? cycle_ : big_done;
  r.drain_cycles = cycle_ - std::min(cycle_, big_done);
  r.committed = big_.committed();
  r.slowdown = baseline_cycles == 0
                   ? 0.0
                   : static_cast<double>(r.checked_cycles) / static_cast<double>(baseline_cycles) -
                         1.0;
  r.stalls = stalls_;
  r.segments = segments_.size();
  std::uint64_t total_len = 0;
  for (const SegmentRecord& s : segments_) {
    if (s.closed) total_len += static_cast<std::uint64_t>(s.end_seq - s.start_seq);
  }
  r.mean_segment_length =
      segments_.empty() ? 0.0 : static_cast<double>(total_len) / static_cast<double>(r.segments);
  r.packets_accepted = fabric_.accepted();
  r.packets_delivered = fabric_.delivered();
  r.packets_in_flight = fabric_.in_flight();
  for (const LittleCore& l : littles_) {
    r.checker_utilization.push_back(
        little_cycle_ == 0 ? 0.0
                           : static_cast<double>(l.busy_cycles()) /
                                 static_cast<double>(little_cycle_));
  }
  r.mismatches = mismatches_;
  r.lag_violations = lag_violations_;
  return r;
}

std::uint64_t SimResult::stall_total() const {
  return std::accumulate(stalls.begin(), stalls.end(), std::uint64_t{0});
}

std::string SimResult::to_text() const {
  std::string s;
  auto kv = [&](std::string_view k, const std::string& v) {
    s += k;
    s += " = ";
    s += v;
    s += '\n';
  };
  kv("baseline_cycles", std::to_string(baseline_cycles));
  kv("checked_cycles", std::to_string(checked_cycles));
  kv("drain_cycles", std::to_string(drain_cycles));
  kv("committed", std::to_string(committed));
  kv("slowdown", fixed6(slowdown));
  for (std::size_t i = 0; i < kNumStallReasons; ++i) {
    kv("stall." + std::string(stall_name(static_cast<StallReason>(i))),
       std::to_string(stalls[i]));
  }
  kv("segments", std::to_string(segments));
  kv("mean_segment_length", fixed6(mean_segment_length));
  kv("packets_accepted", std::to_string(packets_accepted));
  kv("packets_delivered", std::to_string(packets_delivered));
  kv("packets_in_flight", std::to_string(packets_in_flight));
  for (std::size_t i = 0; i < checker_utilization.size(); ++i) {
    kv("utilization." + std::to_string(i + 1), fixed6(checker_utilization[i]));
  }
  kv("mismatches", std::to_string(mismatches));
  kv("lag_violations", std::to_string(lag_violations));
  if (perf_per_area) kv("perf_per_area", fixed6(*perf_per_area));
  return s;
}

std::string SimResult::csv_header() {
  return "baseline_cycles,checked_cycles,slowdown,stall_fabric,stall_starvation,"
         "stall_extraction,segments,mean_segment_length,packets_accepted,packets_delivered,"
         "packets_in_flight,mismatches,perf_per_area";
}

std::string SimResult::to_csv_row() const {
  std::string s;
  s += std::to_string(baseline_cycles) + ',';
  s += std::to_string(checked_cycles) + ',';
  s += fixed6(slowdown) + ',';
  s += std::to_string(stall(StallReason::FabricBackpressure)) + ',';
  s += std::to_string(stall(StallReason::CheckerStarvation)) + ',';
  s += std::to_string(stall(StallReason::StatusExtraction)) + ',';
  s += std::to_string(segments) + ',';
  s += fixed6(mean_segment_length) + ',';
  s += std::to_string(packets_accepted) + ',';
  s += std::to_string(packets_delivered) + ',';
  s += std::to_string(packets_in_flight) + ',';
  s += std::to_string(mismatches) + ',';
  s += perf_per_area ? fixed6(*perf_per_area) : std::string();
  return s;
}

std::uint64_t baseline_run(const SimConfig& config, const FunctionalTrace& trace) {
  config.validate();
  BigCore core(trace,
               DeuParams{config.commit_width, config.timeout_instructions,
                         config.segment_log_budget()},
               config.costs);
  core.set_check_enabled(false);
  std::uint64_t cycles = 0;
  std::uint64_t kernel = 0;
  while (!core.done() || kernel > 0) {
    if (cycles >= config.cycle_cap) throw SimulationError("baseline exceeded the cycle cap");
    if (kernel > 0) {
      --kernel;
    } else if (core.commit_cycle(cycles, ~0u).trap_retired) {
      kernel = config.kernel_cycles;
    }
    ++cycles;
  }
  return cycles;
}

FunctionalTrace golden_trace(const SimConfig& config, const Program& program) {
  Memory mem = Memory::patterned(config.memory_bytes, config.seed);
  return run_functional(program, mem, config.max_instrs);
}

std::uint64_t baseline_run(const SimConfig& config, const Program& program) {
  return baseline_run(config, golden_trace(config, program));
}

double perf_per_area(const SimResult& result, const SimConfig& config) {
  const double area = config.n_littles * config.area.per_little_mm2();
  return (1.0 / (1.0 + result.slowdown)) / area;
}

SimResult simulate(const SimConfig& config, const Program& program, const FunctionalTrace& trace,
                   std::uint64_t baseline_cycles) {
  Engine engine(config, program, trace);
  engine.run();
  SimResult r = engine.result(baseline_cycles);
  r.perf_per_area = perf_per_area(r, config);
  return r;
}

SimResult simulate(const SimConfig& config, const Program& program) {
  config.validate();
  const FunctionalTrace trace = golden_trace(config, program);
  return simulate(config, program, trace, baseline_run(config, trace));
}

}  // namespace paracheck
