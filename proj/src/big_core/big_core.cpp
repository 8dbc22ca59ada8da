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

#include "paracheck/big_core.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace paracheck {

std::string_view trigger_name(RcpTrigger t) {
  switch (t) {
    case RcpTrigger::LogFull: return "LogFull";
    case RcpTrigger::Timeout: return "Timeout";
    case RcpTrigger::KernelTrap: return "KernelTrap";
    case RcpTrigger::ProgramEnd: return "ProgramEnd";
    case RcpTrigger::CheckEnable: return "CheckEnable";
  }
  return "?";
}

std::string_view log_kind_name(LogKind k) {
  switch (k) {
    case LogKind::Load: return "Load";
    case LogKind::Store: return "Store";
    case LogKind::Csr: return "Csr";
  }
  return "?";
}

bool even_parity(std::uint64_t data) { return (std::popcount(data) & 1) != 0; }

LogEntry LogEntry::make(LogKind kind, std::uint64_t address, std::uint64_t data,
                        std::uint64_t seq) {
  return LogEntry{kind, address, data, even_parity(data), seq};
}

std::optional<LogEntry> log_entry_for(const TraceEntry& e) {
  if (e.effect.mem) {
    const auto kind = e.effect.mem->kind == MemKind::Load ? LogKind::Load : LogKind::Store;
    return LogEntry::make(kind, e.effect.mem->addr, e.effect.mem->data, e.seq);
  }
  if (e.effect.csr) {
    return LogEntry::make(LogKind::Csr, e.effect.csr->id, e.effect.csr->value, e.seq);
  }
  return std::nullopt;
}

std::vector<std::uint64_t> status_words(const ArchRegs& regs, std::uint32_t forwarded_csrs) {
  if (forwarded_csrs > kForwardableCsrs.size()) {
    throw std::invalid_argument("at most " + std::to_string(kForwardableCsrs.size()) +
                                " CSRs can be forwarded");
  }
  std::vector<std::uint64_t> w;
  w.reserve(status_word_count(forwarded_csrs));
  w.insert(w.end(), regs.x.begin(), regs.x.end());
  w.insert(w.end(), regs.f.begin(), regs.f.end());
  w.push_back(regs.pc);
  for (std::uint32_t i = 0; i < forwarded_csrs; ++i) {
    auto it = regs.csrs.find(kForwardableCsrs[i]);
    w.push_back(it == regs.csrs.end() ? 0 : it->second);
  }
  return w;
}

ArchRegs regs_from_words(const std::vector<std::uint64_t>& words, std::uint32_t forwarded_csrs,
                         const ArchRegs& base) {
  if (words.size() != status_word_count(forwarded_csrs)) {
    throw std::invalid_argument("status word count mismatch");
  }
  ArchRegs r = base;
  for (std::size_t i = 0; i < 32; ++i) r.x[i] = words[i];
  for (std::size_t i = 0; i < 32; ++i) r.f[i] = words[32 + i];
  r.pc = words[kPcWord];
  for (std::uint32_t i = 0; i < forwarded_csrs; ++i) {
    r.csrs[kForwardableCsrs[i]] = words[kPcWord + 1 + i];
  }
  return r;
}

std::uint32_t status_packet_count(std::uint32_t words, std::uint32_t regs_per_packet) {
  return (words + regs_per_packet - 1) / regs_per_packet;
}

std::uint32_t status_bytes(std::uint32_t forwarded_csrs, std::uint32_t regs_per_packet) {
  const std::uint32_t words = status_word_count(forwarded_csrs);
  return status_packet_count(words, regs_per_packet) * kStatusHeaderBytes + 8 * words;
}

std::vector<StatusPacket> packetize(const std::vector<std::uint64_t>& words, std::uint64_t rcp_id,
                                    std::int64_t big_seq, RcpTrigger trigger,
                                    std::uint32_t regs_per_packet) {
  if (regs_per_packet == 0 || regs_per_packet > kMaxWordsPerPacket) {
    throw std::invalid_argument("regs_per_packet must be in 1..8");
  }
  const auto n = static_cast<std::uint32_t>(words.size());
  const std::uint32_t total = status_packet_count(n, regs_per_packet);
  std::vector<StatusPacket> out;
  out.reserve(total);
  for (std::uint32_t c = 0; c < total; ++c) {
    StatusPacket p;
    p.rcp_id = rcp_id;
    p.chunk = c;
    p.total_chunks = total;
    p.first_word = c * regs_per_packet;
    p.nwords = std::min(regs_per_packet, n - p.first_word);
    p.big_seq = big_seq;
    p.trigger = trigger;
    for (std::uint32_t i = 0; i < p.nwords; ++i) p.words[i] = words[p.first_word + i];
    out.push_back(p);
  }
  return out;
}

std::vector<StatusPacket> extract_status_packets(const Checkpoint& cp,
                                                 std::uint32_t regs_per_packet,
                                                 std::uint32_t forwarded_csrs) {
  return packetize(status_words(cp.regs, forwarded_csrs), cp.rcp_id, cp.big_seq, cp.trigger,
                   regs_per_packet);
}

std::variant<LogEntry, ParityFault> lsq_forward(const LogEntry& entry) {
  if (even_parity(entry.data) != entry.parity) return ParityFault{entry.seq};
  return entry;
}

std::uint32_t CommitCosts::to_units(double cycles) {
  if (!(cycles > 0.0) || !std::isfinite(cycles)) {
    throw std::invalid_argument("commit cost must be positive");
  }
  const auto u = static_cast<std::uint32_t>(std::lround(cycles * kScale));
  return std::max<std::uint32_t>(1, u);
}

CommitCosts CommitCosts::defaults() {
  CommitCosts c;
  auto set = [&](InstrClass k, double cycles) { c.units[class_index(k)] = to_units(cycles); };
  set(InstrClass::IntAlu, 0.5);
  set(InstrClass::Mul, 0.5);
  set(InstrClass::Div, 2.0);
  set(InstrClass::FpAlu, 0.5);
  set(InstrClass::Load, 0.5);
  set(InstrClass::Store, 0.5);
  set(InstrClass::Branch, 0.5);
  set(InstrClass::Jump, 0.5);
  set(InstrClass::CsrRead, 1.0);
  set(InstrClass::Trap, 1.0);
  set(InstrClass::Nop, 0.25);
  return c;
}

std::optional<RcpTrigger> should_trigger_rcp(const DeuState& deu, const DeuParams& params,
                                             std::uint64_t lsl_bytes_free, bool trap_pending,
                                             bool program_done) {
  if (!deu.check_enabled || deu.instrs_since_rcp == 0) return std::nullopt;
  if (trap_pending) return RcpTrigger::KernelTrap;
  if (lsl_bytes_free < static_cast<std::uint64_t>(params.commit_width) * kLogEntryBytes) {
    return RcpTrigger::LogFull;
  }
  if (deu.instrs_since_rcp >= params.timeout_instructions) return RcpTrigger::Timeout;
  if (program_done) return RcpTrigger::ProgramEnd;
  return std::nullopt;
}

BigCore::BigCore(const FunctionalTrace& trace, DeuParams params, CommitCosts costs)
    : trace_(&trace), params_(params), costs_(costs), regs_(trace.initial) {
  if (params_.commit_width == 0 || params_.commit_width > 32) {
    throw std::invalid_argument("commit_width must be in 1..32");
  }
}

CommitBundle BigCore::commit_cycle(std::uint64_t cycle, std::uint32_t runtime_path_free) {
  CommitBundle b;
  b.cycle = cycle;
  const bool logging = deu_.check_enabled && deu_.segment_open;
  std::uint32_t avail = CommitCosts::kScale;
  const auto& entries = trace_->entries;

  while (b.retired.size() < params_.commit_width && cursor_ < entries.size()) {
    if (logging && deu_.instrs_since_rcp >= params_.timeout_instructions) break;
    const TraceEntry& e = entries[cursor_];
    const std::uint32_t cost = costs_.units[class_index(e.instr.cls())];
    const std::uint32_t need = cost - std::min(cost, progress_);
    if (need > avail) {
      progress_ += avail;
      break;
    }
    std::optional<LogEntry> log = logging ? log_entry_for(e) : std::nullopt;
    const auto slot = static_cast<std::uint32_t>(b.retired.size());
    if (log && !(runtime_path_free & (1u << slot))) {
      b.blocked_by_fabric = true;
      break;
    }
    avail -= need;
    progress_ = 0;
    apply_to_regs(regs_, e.effect);
    ++cursor_;
    b.retired.push_back(&e);
    if (logging) {
      ++deu_.instrs_since_rcp;
      if (log) {
        deu_.bytes_in_current_segment += kLogEntryBytes;
        b.log_entries.push_back(*log);
        b.log_paths.push_back(slot);
      }
    }
    if (e.effect.trap) {
      b.trap_retired = true;
      break;
    }
  }

  if (logging) {
    const std::uint64_t used = deu_.bytes_in_current_segment;
    const std::uint64_t free =
        used >= params_.segment_log_budget ? 0 : params_.segment_log_budget - used;
    if (auto trig = should_trigger_rcp(deu_, params_, free, b.trap_retired, done())) {
      b.rcp = take_checkpoint(*trig);
      deu_.segment_open = false;
    }
  }
  return b;
}

Checkpoint BigCore::take_checkpoint(RcpTrigger trigger) {
  Checkpoint cp;
  cp.rcp_id = next_rcp_id_++;
  cp.regs = regs_;
  cp.trigger = trigger;
  cp.big_seq = last_committed_seq();
  deu_.instrs_since_rcp = 0;
  deu_.bytes_in_current_segment = 0;
  return cp;
}

Checkpoint BigCore::open_segment() {
  if (!deu_.check_enabled) throw std::logic_error("cannot open a segment with checking disabled");
  Checkpoint cp = take_checkpoint(RcpTrigger::CheckEnable);
  deu_.segment_open = true;
  return cp;
}

void BigCore::set_check_enabled(bool enabled) {
  deu_.check_enabled = enabled;
  if (!enabled) deu_.segment_open = false;
}

}  // namespace paracheck
