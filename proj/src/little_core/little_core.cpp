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

#include "paracheck/little_core.hpp"

#include <algorithm>
#include <bit>
#include <string>

namespace paracheck {

void LittleTiming::validate() const {
  if (div_unroll == 0 || div_unroll > 64 || !std::has_single_bit(div_unroll)) {
    throw std::invalid_argument("div_unroll must be one of 1,2,4,8,16,32,64");
  }
  if (fpu_latency == 0 || fpu_latency > 64) {
    throw std::invalid_argument("fpu_latency must be in 1..64");
  }
}

void Lsl::push_status(const StatusPacket& p) {
  if (p.wire_bytes() > free()) throw LslOverflow("LSL overflow on status chunk");
  occupied_ += p.wire_bytes();
  status_.push_back(p);
}

void Lsl::push_runtime(const LogEntry& e) {
  if (kLogEntryBytes > free()) throw LslOverflow("LSL overflow on runtime entry");
  occupied_ += kLogEntryBytes;
  runtime_.push_back(e);
  ++runtime_pushed_;
}

bool Lsl::checkpoint_ready() const {
  if (status_.empty()) return false;
  const StatusPacket& head = status_.front();
  std::uint32_t have = 0;
  for (const StatusPacket& p : status_) {
    if (p.rcp_id != head.rcp_id) break;
    ++have;
  }
  return have >= head.total_chunks;
}

std::optional<std::vector<std::uint64_t>> Lsl::pop_checkpoint(std::uint64_t* rcp_id,
                                                              std::int64_t* big_seq) {
  if (!checkpoint_ready()) return std::nullopt;
  const StatusPacket head = status_.front();
  std::vector<std::uint64_t> words;
  std::vector<bool> seen(head.total_chunks, false);
  for (std::uint32_t i = 0; i < head.total_chunks; ++i) {
    const StatusPacket p = status_.front();
    status_.pop_front();
    occupied_ -= p.wire_bytes();
    if (p.chunk >= head.total_chunks || seen[p.chunk]) {
      throw std::logic_error("malformed checkpoint in LSL");
    }
    seen[p.chunk] = true;
    if (words.size() < p.first_word + p.nwords) words.resize(p.first_word + p.nwords);
    std::copy_n(p.words.begin(), p.nwords, words.begin() + p.first_word);
  }
  if (rcp_id) *rcp_id = head.rcp_id;
  if (big_seq) *big_seq = head.big_seq;
  return words;
}

LogEntry Lsl::pop_runtime() {
  LogEntry e = runtime_.front();
  runtime_.pop_front();
  occupied_ -= kLogEntryBytes;
  ++runtime_popped_;
  return e;
}

std::size_t Lsl::discard_runtime() {
  const std::size_t n = runtime_.size();
  while (!runtime_.empty()) pop_runtime();
  return n;
}

void Lsl::reserve(std::uint32_t tid) {
  if (reserved_for_ && *reserved_for_ != tid) {
    throw std::logic_error("LSL already reserved for thread " + std::to_string(*reserved_for_));
  }
  reserved_for_ = tid;
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Match: return "Match";
    case Outcome::RegMismatch: return "RegMismatch";
    case Outcome::MemMismatch: return "MemMismatch";
    case Outcome::CsrMismatch: return "CsrMismatch";
  }
  return "?";
}

std::string_view little_stall_name(LittleStall s) {
  switch (s) {
    case LittleStall::None: return "None";
    case LittleStall::Idle: return "Idle";
    case LittleStall::WaitingSrcp: return "WaitingSrcp";
    case LittleStall::LslEmpty: return "LslEmpty";
    case LittleStall::LagGuard: return "LagGuard";
    case LittleStall::Busy: return "Busy";
    case LittleStall::AwaitingErcp: return "AwaitingErcp";
    case LittleStall::Draining: return "Draining";
  }
  return "?";
}

VerifyResult compare_status(const std::vector<std::uint64_t>& expected,
                            const std::vector<std::uint64_t>& actual) {
  VerifyResult r;
  const std::size_t n = std::max(expected.size(), actual.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t e = i < expected.size() ? expected[i] : 0;
    const std::uint64_t a = i < actual.size() ? actual[i] : 0;
    if (e != a) {
      r.outcome = Outcome::RegMismatch;
      r.reg_index = static_cast<std::uint32_t>(i);
      r.expected = e;
      r.actual = a;
      return r;
    }
  }
  return r;
}

LittleCore::LittleCore(std::uint32_t id, const Program& program, LittleTiming timing,
                       std::uint64_t lsl_capacity, std::uint32_t forwarded_csrs)
    : id_(id),
      program_(&program),
      timing_(timing),
      forwarded_csrs_(forwarded_csrs),
      lsl_(lsl_capacity),
      regs_(ArchRegs::reset(program.entry)) {
  timing_.validate();
}

void LittleCore::assign(const SegmentAssignment& a) {
  if (state_ != LittleState::Idle) {
    throw std::logic_error("little core " + std::to_string(id_) + " is busy");
  }
  if (!lsl_.empty()) throw std::logic_error("assigning a segment to a non-empty LSL");
  lsl_.reserve(a.tid);
  msu_.checker_tid = a.tid;
  msu_.mode = CoreMode::Check;
  msu_.recorded_regs = regs_;
  srcp_rcp_id_ = a.srcp_rcp_id;
  start_seq_ = a.start_big_seq;
  next_seq_ = a.start_big_seq + 1;
  end_seq_.reset();
  ercp_rcp_id_.reset();
  div_done_.reset();
  state_ = LittleState::WaitingSrcp;
}

void LittleCore::close_segment(std::uint64_t ercp_rcp_id, std::int64_t end_big_seq) {
  if (state_ == LittleState::Idle) throw std::logic_error("closing a segment on an idle core");
  ercp_rcp_id_ = ercp_rcp_id;
  end_seq_ = end_big_seq;
  if (state_ == LittleState::Replaying && next_seq_ > end_big_seq) {
    state_ = LittleState::AwaitingErcp;
  }
}

bool LittleCore::apply_srcp() {
  if (msu_.mode != CoreMode::Check) throw std::logic_error("l.apply outside check mode");
  std::uint64_t rcp = 0;
  std::int64_t big_seq = 0;
  auto words = lsl_.pop_checkpoint(&rcp, &big_seq);
  if (!words) return false;
  if (state_ == LittleState::WaitingSrcp && rcp != srcp_rcp_id_) {
    throw std::logic_error("little core " + std::to_string(id_) + " expected SRCP " +
                           std::to_string(srcp_rcp_id_) + " but found " + std::to_string(rcp));
  }
  regs_ = regs_from_words(*words, forwarded_csrs_, regs_);
  start_seq_ = big_seq;
  next_seq_ = big_seq + 1;
  int_ready_.fill(0);
  fp_ready_.fill(0);
  div_done_.reset();
  state_ = LittleState::Replaying;
  if (end_seq_ && next_seq_ > *end_seq_) state_ = LittleState::AwaitingErcp;
  return true;
}

VerifyResult LittleCore::mismatch(Outcome o, MismatchField f, std::uint64_t seq,
                                  std::uint64_t expected, std::uint64_t actual,
                                  std::uint64_t cycle) {
  VerifyResult r;
  r.outcome = o;
  r.field = f;
  r.log_seq = seq;
  r.expected = expected;
  r.actual = actual;
  r.detect_cycle = cycle;
  last_result_ = r;
  state_ = LittleState::Draining;
  return r;
}

VerifyResult LittleCore::verify_ercp(std::uint64_t cycle) {
  std::uint64_t rcp = 0;
  auto words = lsl_.pop_checkpoint(&rcp);
  if (!words) throw std::logic_error("verify without a complete ERCP");
  if (ercp_rcp_id_ && rcp != *ercp_rcp_id_) {
    throw std::logic_error("little core " + std::to_string(id_) + " expected ERCP " +
                           std::to_string(*ercp_rcp_id_) + " but found " + std::to_string(rcp));
  }
  VerifyResult r = compare_status(*words, status_words(regs_, forwarded_csrs_));
  if (r.match() && lsl_.runtime_front()) {
    // Replay consumed fewer log entries than the big core produced.
    r.outcome = Outcome::MemMismatch;
    r.field = MismatchField::Kind;
    r.log_seq = lsl_.runtime_front()->seq;
  }
  if (!r.match()) r.detect_cycle = cycle;
  last_result_ = r;
  return r;
}

void LittleCore::finish_segment() {
  lsl_.discard_runtime();
  if (!lsl_.empty()) {
    throw std::logic_error("little core " + std::to_string(id_) +
                           " finished a segment with status data left in its LSL");
  }
  lsl_.release();
  if (msu_.recorded_regs) regs_ = *msu_.recorded_regs;
  msu_.mode = CoreMode::Application;
  state_ = LittleState::Idle;
  end_seq_.reset();
  ercp_rcp_id_.reset();
}

bool LittleCore::operands_ready(const Instruction& in, std::uint64_t cycle) const {
  auto ready = [&](bool fp, std::uint8_t r) {
    return (fp ? fp_ready_[r] : int_ready_[r]) <= cycle;
  };
  if (in.reads_src1() && !ready(in.src1_is_fp(), in.src1)) return false;
  if (in.reads_src2() && !ready(in.src2_is_fp(), in.src2)) return false;
  return true;
}

CheckOutcome LittleCore::check_cycle(const CheckContext& ctx) {
  CheckOutcome out = step(ctx);
  if (state_ != LittleState::Idle || out.segment_done) ++busy_cycles_;
  ++stalls_[static_cast<std::size_t>(out.stall)];
  return out;
}

CheckOutcome LittleCore::step(const CheckContext& ctx) {
  CheckOutcome out;
  switch (state_) {
    case LittleState::Idle: out.stall = LittleStall::Idle; return out;
    case LittleState::WaitingSrcp:
      if (!apply_srcp()) out.stall = LittleStall::WaitingSrcp;
      return out;
    case LittleState::Replaying: return replay_one(ctx);
    case LittleState::AwaitingErcp:
      if (!lsl_.checkpoint_ready()) {
        out.stall = LittleStall::AwaitingErcp;
        return out;
      }
      out.result = verify_ercp(ctx.cycle);
      finish_segment();
      out.segment_done = true;
      return out;
    case LittleState::Draining:
      lsl_.discard_runtime();
      if (!lsl_.checkpoint_ready()) {
        out.stall = LittleStall::Draining;
        return out;
      }
      lsl_.pop_checkpoint();
      finish_segment();
      out.segment_done = true;
      return out;
  }
  return out;
}

CheckOutcome LittleCore::replay_one(const CheckContext& ctx) {
  CheckOutcome out;
  const std::uint64_t cycle = ctx.cycle;
  if (div_done_ && cycle < *div_done_) {
    out.stall = LittleStall::Busy;
    return out;
  }
  if (!div_done_ && !end_seq_) {
    const bool hold = ctx.lag_guard
                          ? lag_guard_check(ctx.big_last_seq, next_seq_) == LagVerdict::Hold
                          : next_seq_ > ctx.big_last_seq;
    if (hold) {
      out.stall = LittleStall::LagGuard;
      return out;
    }
  }
  if (regs_.pc >= program_->size()) {
    out.result = mismatch(Outcome::RegMismatch, MismatchField::None,
                          static_cast<std::uint64_t>(next_seq_), program_->size(), regs_.pc, cycle);
    out.result->reg_index = kPcWord;
    last_result_ = out.result;
    return out;
  }
  const Instruction& in = program_->code[regs_.pc];
  const InstrClass cls = in.cls();
  if (!div_done_ && !operands_ready(in, cycle)) {
    out.stall = LittleStall::Busy;
    return out;
  }
  const bool mem = cls == InstrClass::Load || cls == InstrClass::Store ||
                   cls == InstrClass::CsrRead;
  const LogEntry* head = mem ? lsl_.runtime_front() : nullptr;
  if (mem && !head) {
    if (end_seq_ && lsl_.checkpoint_ready()) {
      // The ERCP trails every log entry of the segment, so none are coming.
      out.result = mismatch(Outcome::MemMismatch, MismatchField::Kind,
                            static_cast<std::uint64_t>(next_seq_), 0, 0, cycle);
      return out;
    }
    out.stall = LittleStall::LslEmpty;
    return out;
  }
  if (cls == InstrClass::Div && !div_done_) {
    const std::uint32_t k = timing_.div_cycles();
    if (k > 1) {
      div_done_ = cycle + k - 1;
      out.stall = LittleStall::Busy;
      return out;
    }
  }
  div_done_.reset();

  std::uint64_t load_value = 0;
  std::uint64_t csr_value = 0;
  if (mem) {
    const LogEntry e = lsl_.pop_runtime();
    const LogKind want = cls == InstrClass::Load    ? LogKind::Load
                         : cls == InstrClass::Store ? LogKind::Store
                                                    : LogKind::Csr;
    if (e.kind != want) {
      out.result = mismatch(Outcome::MemMismatch, MismatchField::Kind, e.seq,
                            static_cast<std::uint64_t>(want), static_cast<std::uint64_t>(e.kind),
                            cycle);
      return out;
    }
    if (cls == InstrClass::CsrRead) {
      if (e.address != in.csr) {
        out.result = mismatch(Outcome::CsrMismatch, MismatchField::CsrId, e.seq, in.csr,
                              e.address, cycle);
        return out;
      }
      csr_value = e.data;
    } else {
      const std::uint64_t addr = effective_address(regs_, in);
      if (e.address != addr) {
        out.result = mismatch(Outcome::MemMismatch, MismatchField::Addr, e.seq, addr, e.address,
                              cycle);
        return out;
      }
      if (cls == InstrClass::Load) {
        load_value = e.data;
      } else {
        const std::uint64_t data = read_reg(regs_, in.src2_is_fp(), in.src2);
        if (e.data != data) {
          out.result = mismatch(Outcome::MemMismatch, MismatchField::Data, e.seq, data, e.data,
                                cycle);
          return out;
        }
      }
    }
  }

  const ExecEffect fx = evaluate(regs_, in, load_value, csr_value);
  apply_to_regs(regs_, fx);
  if (cls == InstrClass::FpAlu && fx.reg) {
    auto& ready = fx.reg->fp ? fp_ready_ : int_ready_;
    ready[fx.reg->index] = cycle + timing_.fpu_latency;
  }
  ++next_seq_;
  ++retired_;
  out.retired = true;
  if (end_seq_ && next_seq_ > *end_seq_) state_ = LittleState::AwaitingErcp;
  return out;
}

MsuEffect LittleCore::msu_exec(MsuOp op, std::uint64_t operand, bool privileged) {
  MsuEffect fx;
  switch (op) {
    case MsuOp::Mode:
      if (!privileged) throw PrivilegeTrap("l.mode requires kernel privilege");
      msu_.mode = operand ? CoreMode::Check : CoreMode::Application;
      break;
    case MsuOp::Record: msu_.recorded_regs = regs_; break;
    case MsuOp::Apply: fx.applied = apply_srcp(); break;
    case MsuOp::Jal: regs_.pc = operand; break;
    case MsuOp::Rslt: fx.result = last_result_.has_value() && last_result_->match(); break;
  }
  return fx;
}

}  // namespace paracheck
