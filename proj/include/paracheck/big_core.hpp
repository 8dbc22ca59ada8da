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
 * @file big_core.hpp
 * @brief Commit-granularity model of the out-of-order core and its data
 *        extraction unit (DEU).
 *
 * The core retires the golden functional trace in order, at most
 * `commit_width` instructions per cycle, each charged a per-class commit cost
 * measured in 1/16 cycle units. While checking is enabled the DEU emits one
 * LogEntry per retired Load/Store/CsrRead and cuts register checkpoints
 * (RCPs) when the segment log is full, the instruction timeout is reached,
 * the program traps into the kernel or the program ends.
 */

#ifndef PARACHECK_BIG_CORE_HPP
#define PARACHECK_BIG_CORE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "paracheck/functional.hpp"
#include "paracheck/isa.hpp"

namespace paracheck {

enum class RcpTrigger : std::uint8_t {
  LogFull,
  Timeout,
  KernelTrap,
  ProgramEnd,
  /// Opening checkpoint of a segment that has no predecessor to share with
  /// (program start, or the first segment after a kernel window).
  CheckEnable,
};

std::string_view trigger_name(RcpTrigger t);

struct Checkpoint {
  std::uint64_t rcp_id = 0;
  ArchRegs regs;
  RcpTrigger trigger = RcpTrigger::CheckEnable;
  /// Seq of the last instruction committed before the checkpoint; -1 when
  /// nothing has committed yet.
  std::int64_t big_seq = -1;
};

enum class LogKind : std::uint8_t { Load, Store, Csr };

std::string_view log_kind_name(LogKind k);

/// Wire size of a log entry: kind (1) + address (8) + data (8). Parity
/// travels out of band.
inline constexpr std::uint32_t kLogEntryBytes = 17;
/// Status packet header: rcp id, chunk index and segment bookkeeping.
inline constexpr std::uint32_t kStatusHeaderBytes = 8;
inline constexpr std::uint32_t kMaxWordsPerPacket = 8;

bool even_parity(std::uint64_t data);

struct LogEntry {
  LogKind kind = LogKind::Load;
  /// Memory address, or the CSR id for Csr entries.
  std::uint64_t address = 0;
  std::uint64_t data = 0;
  bool parity = false;
  std::uint64_t seq = 0;

  static LogEntry make(LogKind kind, std::uint64_t address, std::uint64_t data,
                       std::uint64_t seq);
  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

/// Log entry produced by a retired instruction, if any.
std::optional<LogEntry> log_entry_for(const TraceEntry& entry);

struct StatusPacket {
  std::uint64_t rcp_id = 0;
  std::uint32_t chunk = 0;
  std::uint32_t total_chunks = 0;
  std::uint32_t first_word = 0;
  std::uint32_t nwords = 0;
  std::int64_t big_seq = -1;
  RcpTrigger trigger = RcpTrigger::CheckEnable;
  std::array<std::uint64_t, kMaxWordsPerPacket> words{};

  std::uint32_t wire_bytes() const { return kStatusHeaderBytes + 8 * nwords; }
  friend bool operator==(const StatusPacket&, const StatusPacket&) = default;
};

/// Forwarded status words: x0..x31, f0..f31, pc, then the first
/// `forwarded_csrs` entries of kForwardableCsrs.
std::vector<std::uint64_t> status_words(const ArchRegs& regs, std::uint32_t forwarded_csrs);
inline constexpr std::uint32_t kPcWord = 64;
inline constexpr std::uint32_t status_word_count(std::uint32_t forwarded_csrs) {
  return 65 + forwarded_csrs;
}

/// Rebuilds registers from status words. CSRs that are not forwarded keep
/// their values from `base`.
ArchRegs regs_from_words(const std::vector<std::uint64_t>& words, std::uint32_t forwarded_csrs,
                         const ArchRegs& base);

std::uint32_t status_packet_count(std::uint32_t words, std::uint32_t regs_per_packet);

/// Bytes one serialized checkpoint occupies in an LSL.
std::uint32_t status_bytes(std::uint32_t forwarded_csrs, std::uint32_t regs_per_packet);

std::vector<StatusPacket> packetize(const std::vector<std::uint64_t>& words, std::uint64_t rcp_id,
                                    std::int64_t big_seq, RcpTrigger trigger,
                                    std::uint32_t regs_per_packet);

std::vector<StatusPacket> extract_status_packets(const Checkpoint& cp,
                                                 std::uint32_t regs_per_packet,
                                                 std::uint32_t forwarded_csrs);

struct ParityFault {
  std::uint64_t seq = 0;
};

/// LSQ-to-fabric hand-off: recompute parity and refuse corrupted entries.
std::variant<LogEntry, ParityFault> lsq_forward(const LogEntry& entry);

/// Commit cost per class, in 1/kScale cycles.
struct CommitCosts {
  static constexpr std::uint32_t kScale = 16;
  std::array<std::uint32_t, kNumClasses> units{};

  static CommitCosts defaults();
  static std::uint32_t to_units(double cycles);
  double cycles(InstrClass c) const {
    return static_cast<double>(units[class_index(c)]) / kScale;
  }
};

struct DeuState {
  bool check_enabled = true;
  /// A segment is open between its opening checkpoint and its closing one.
  bool segment_open = false;
  std::uint64_t instrs_since_rcp = 0;
  std::uint64_t bytes_in_current_segment = 0;
  std::uint32_t status_extraction_remaining = 0;
};

struct DeuParams {
  std::uint32_t commit_width = 4;
  std::uint64_t timeout_instructions = 5000;
  /// Runtime-log bytes a segment may use in its destination LSL.
  std::uint64_t segment_log_budget = 4096;
};

/// Trigger decision after a commit cycle. Priority: KernelTrap > LogFull >
/// Timeout > ProgramEnd. Nothing fires for an empty segment.
std::optional<RcpTrigger> should_trigger_rcp(const DeuState& deu, const DeuParams& params,
                                             std::uint64_t lsl_bytes_free, bool trap_pending,
                                             bool program_done);

struct CommitBundle {
  std::uint64_t cycle = 0;
  std::vector<const TraceEntry*> retired;
  std::vector<LogEntry> log_entries;
  /// Commit path (slot in the bundle) that produced each log entry.
  std::vector<std::uint32_t> log_paths;
  std::optional<Checkpoint> rcp;
  bool trap_retired = false;
  bool blocked_by_fabric = false;
};

class BigCore {
 public:
  BigCore(const FunctionalTrace& trace, DeuParams params, CommitCosts costs);

  /// Retires up to commit_width instructions. `runtime_path_free` has bit k
  /// set when commit path k can take one more runtime packet; a log-producing
  /// instruction on a full path ends the bundle.
  CommitBundle commit_cycle(std::uint64_t cycle, std::uint32_t runtime_path_free);

  /// Takes the opening checkpoint of a new segment at the current state.
  Checkpoint open_segment();

  void set_check_enabled(bool enabled);

  bool done() const { return cursor_ == trace_->entries.size(); }
  std::uint64_t committed() const { return cursor_; }
  std::int64_t last_committed_seq() const { return static_cast<std::int64_t>(cursor_) - 1; }
  const ArchRegs& regs() const { return regs_; }
  const DeuState& deu() const { return deu_; }
  DeuState& deu() { return deu_; }
  const DeuParams& params() const { return params_; }
  std::uint64_t next_rcp_id() const { return next_rcp_id_; }

 private:
  Checkpoint take_checkpoint(RcpTrigger trigger);

  const FunctionalTrace* trace_;
  DeuParams params_;
  CommitCosts costs_;
  DeuState deu_;
  ArchRegs regs_;
  std::size_t cursor_ = 0;
  std::uint32_t progress_ = 0;
  std::uint64_t next_rcp_id_ = 0;
};

}  // namespace paracheck

#endif  // PARACHECK_BIG_CORE_HPP
