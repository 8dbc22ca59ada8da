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
 * @file little_core.hpp
 * @brief In-order checker core: load-store log, mode switch unit, and the
 *        apply / replay / verify cycle of one segment.
 */

#ifndef PARACHECK_LITTLE_CORE_HPP
#define PARACHECK_LITTLE_CORE_HPP

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "paracheck/big_core.hpp"
#include "paracheck/os_model.hpp"
#include "paracheck/program.hpp"

namespace paracheck {

struct LittleTiming {
  std::uint32_t div_unroll = 8;
  std::uint32_t fpu_latency = 3;

  std::uint32_t div_cycles() const { return (64 + div_unroll - 1) / div_unroll; }
  /// Longest blocking occupancy of one instruction (the divider; the FPU is
  /// pipelined).
  std::uint32_t worst_cycles() const { return div_cycles(); }
  void validate() const;
};

class LslOverflow : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Lsl {
 public:
  explicit Lsl(std::uint64_t capacity_bytes) : capacity_(capacity_bytes) {}

  void push_status(const StatusPacket& p);
  void push_runtime(const LogEntry& e);

  /// True when every chunk of the oldest checkpoint is present.
  bool checkpoint_ready() const;
  /// Removes the oldest complete checkpoint and returns its words.
  std::optional<std::vector<std::uint64_t>> pop_checkpoint(std::uint64_t* rcp_id = nullptr,
                                                           std::int64_t* big_seq = nullptr);
  std::size_t status_chunks() const { return status_.size(); }

  const LogEntry* runtime_front() const { return runtime_.empty() ? nullptr : &runtime_.front(); }
  LogEntry pop_runtime();
  std::size_t runtime_size() const { return runtime_.size(); }
  /// Drops all runtime entries; returns how many were discarded.
  std::size_t discard_runtime();

  std::uint64_t capacity() const { return capacity_; }
  std::uint64_t occupied() const { return occupied_; }
  std::uint64_t free() const { return capacity_ - occupied_; }
  bool empty() const { return status_.empty() && runtime_.empty(); }

  std::optional<std::uint32_t> reserved_for() const { return reserved_for_; }
  void reserve(std::uint32_t tid);
  void release() { reserved_for_.reset(); }

  std::uint64_t runtime_pushed() const { return runtime_pushed_; }
  std::uint64_t runtime_popped() const { return runtime_popped_; }

 private:
  std::uint64_t capacity_;
  std::uint64_t occupied_ = 0;
  std::deque<StatusPacket> status_;
  std::deque<LogEntry> runtime_;
  std::optional<std::uint32_t> reserved_for_;
  std::uint64_t runtime_pushed_ = 0;
  std::uint64_t runtime_popped_ = 0;
};

struct Msu {
  CoreMode mode = CoreMode::Application;
  std::optional<std::uint32_t> hooked_big;
  std::uint32_t checker_tid = 0;
  std::optional<ArchRegs> recorded_regs;
};

enum class Outcome : std::uint8_t { Match, RegMismatch, MemMismatch, CsrMismatch };
enum class MismatchField : std::uint8_t { None, Addr, Data, Kind, CsrId };

std::string_view outcome_name(Outcome o);

struct VerifyResult {
  Outcome outcome = Outcome::Match;
  /// Status word index for RegMismatch (64 is the pc).
  std::uint32_t reg_index = 0;
  std::uint64_t log_seq = 0;
  MismatchField field = MismatchField::None;
  std::uint64_t expected = 0;
  std::uint64_t actual = 0;
  std::optional<std::uint64_t> detect_cycle;

  bool match() const { return outcome == Outcome::Match; }
};

/// Compares two status-word vectors; the first differing index wins.
VerifyResult compare_status(const std::vector<std::uint64_t>& expected,
                            const std::vector<std::uint64_t>& actual);

enum class LittleStall : std::uint8_t {
  None,
  Idle,
  WaitingSrcp,
  LslEmpty,
  LagGuard,
  Busy,
  AwaitingErcp,
  Draining,
};
inline constexpr std::size_t kNumLittleStalls = 8;
std::string_view little_stall_name(LittleStall s);

enum class LittleState : std::uint8_t { Idle, WaitingSrcp, Replaying, AwaitingErcp, Draining };

struct SegmentAssignment {
  std::uint64_t segment_id = 0;
  std::uint64_t srcp_rcp_id = 0;
  /// Seq of the last instruction before the segment.
  std::int64_t start_big_seq = -1;
  std::uint32_t tid = 0;
};

struct CheckContext {
  std::uint64_t cycle = 0;
  /// Seq of the big core's most recently committed instruction.
  std::int64_t big_last_seq = -1;
  bool lag_guard = true;
};

struct CheckOutcome {
  bool retired = false;
  LittleStall stall = LittleStall::None;
  /// Set on a mismatch, or on the verify at the end of the segment.
  std::optional<VerifyResult> result;
  /// The core finished its segment this cycle and is free again.
  bool segment_done = false;
};

enum class MsuOp : std::uint8_t { Mode, Record, Apply, Jal, Rslt };

class PrivilegeTrap : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MsuEffect {
  bool applied = false;
  bool result = false;
};

class LittleCore {
 public:
  LittleCore(std::uint32_t id, const Program& program, LittleTiming timing,
             std::uint64_t lsl_capacity, std::uint32_t forwarded_csrs);

  std::uint32_t id() const { return id_; }
  Lsl& lsl() { return lsl_; }
  const Lsl& lsl() const { return lsl_; }
  const Msu& msu() const { return msu_; }
  const ArchRegs& regs() const { return regs_; }
  LittleState state() const { return state_; }
  bool free() const { return state_ == LittleState::Idle; }
  const LittleTiming& timing() const { return timing_; }

  /// Schedules a checker thread for a segment: Check mode, LSL reserved,
  /// registers recorded.
  void assign(const SegmentAssignment& a);
  /// The segment's end became known when the big core took its closing RCP.
  void close_segment(std::uint64_t ercp_rcp_id, std::int64_t end_big_seq);
  bool segment_closed() const { return end_seq_.has_value(); }

  /// Consumes a complete SRCP from the status FIFO. False while chunks are
  /// missing.
  bool apply_srcp();
  CheckOutcome check_cycle(const CheckContext& ctx);
  /// Pops the ERCP and compares all status words against the replayed
  /// registers. Requires a complete ERCP.
  VerifyResult verify_ercp(std::uint64_t cycle);
  MsuEffect msu_exec(MsuOp op, std::uint64_t operand, bool privileged);

  std::int64_t next_seq() const { return next_seq_; }
  std::uint64_t retired() const { return retired_; }
  std::uint64_t busy_cycles() const { return busy_cycles_; }
  const std::array<std::uint64_t, kNumLittleStalls>& stalls() const { return stalls_; }
  std::optional<VerifyResult> last_result() const { return last_result_; }

 private:
  CheckOutcome step(const CheckContext& ctx);
  CheckOutcome replay_one(const CheckContext& ctx);
  VerifyResult mismatch(Outcome o, MismatchField f, std::uint64_t seq, std::uint64_t expected,
                        std::uint64_t actual, std::uint64_t cycle);
  void finish_segment();
  bool operands_ready(const Instruction& in, std::uint64_t cycle) const;

  std::uint32_t id_;
  const Program* program_;
  LittleTiming timing_;
  std::uint32_t forwarded_csrs_;
  Lsl lsl_;
  Msu msu_;
  ArchRegs regs_;
  LittleState state_ = LittleState::Idle;
  std::uint64_t srcp_rcp_id_ = 0;
  std::int64_t start_seq_ = -1;
  std::int64_t next_seq_ = 0;
  std::optional<std::int64_t> end_seq_;
  std::optional<std::uint64_t> ercp_rcp_id_;
  std::optional<std::uint64_t> div_done_;
  std::array<std::uint64_t, 32> int_ready_{};
  std::array<std::uint64_t, 32> fp_ready_{};
  std::optional<VerifyResult> last_result_;
  std::uint64_t retired_ = 0;
  std::uint64_t busy_cycles_ = 0;
  std::array<std::uint64_t, kNumLittleStalls> stalls_{};
};

}  // namespace paracheck

#endif  // PARACHECK_LITTLE_CORE_HPP
