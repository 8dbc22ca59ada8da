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
 * @file isa.hpp
 * @brief Minimal RISC-like instruction set, architectural state and the
 *        functional semantics shared by the big core, the checkers and the
 *        golden oracle.
 *
 * Instructions are grouped into eleven commit-visible classes. Every opcode
 * maps to exactly one class; timing models only ever look at the class.
 * Control-flow immediates are instruction-index relative (branches) or
 * absolute indices added to a register (jumps), so the program counter is an
 * instruction index rather than a byte address.
 */

#ifndef PARACHECK_ISA_HPP
#define PARACHECK_ISA_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace paracheck {

enum class InstrClass : std::uint8_t {
  IntAlu,
  Mul,
  Div,
  FpAlu,
  Load,
  Store,
  Branch,
  Jump,
  CsrRead,
  Trap,
  Nop,
};

inline constexpr std::size_t kNumClasses = 11;

std::string_view class_name(InstrClass c);
std::optional<InstrClass> class_from_name(std::string_view name);

inline constexpr std::size_t class_index(InstrClass c) {
  return static_cast<std::size_t>(c);
}

enum class Opcode : std::uint8_t {
  Add, Sub, And, Or, Xor, Sll, Srl, Slt,
  Addi, Andi, Ori, Xori, Slli, Srli, Li,
  Mul,
  Div, Rem,
  Fadd, Fmul, FmvDX, FmvXD,
  Ld,
  Sd,
  Beq, Bne, Blt, Bge,
  Jal,
  Csrr,
  Ecall,
  Nop,
};

InstrClass class_of(Opcode op);
std::string_view mnemonic(Opcode op);

struct Instruction {
  Opcode op = Opcode::Nop;
  std::uint8_t dest = 0;
  std::uint8_t src1 = 0;
  std::uint8_t src2 = 0;
  std::uint16_t csr = 0;
  std::int64_t imm = 0;

  InstrClass cls() const { return class_of(op); }

  // Operand banks. Only FpAlu opcodes touch the fp register file.
  bool dest_is_fp() const;
  bool src1_is_fp() const;
  bool src2_is_fp() const;
  bool writes_reg() const;
  bool reads_src1() const;
  bool reads_src2() const;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

// CSRs carried in checkpoints, in serialization order.
inline constexpr std::uint16_t kCsrMepc = 0x341;
inline constexpr std::uint16_t kCsrMcause = 0x342;
inline constexpr std::uint16_t kCsrMstatus = 0x300;
inline constexpr std::uint16_t kCsrMscratch = 0x340;
inline constexpr std::array<std::uint16_t, 4> kForwardableCsrs = {
    kCsrMepc, kCsrMcause, kCsrMstatus, kCsrMscratch};
inline constexpr std::uint64_t kEcallCause = 8;

struct ArchRegs {
  std::array<std::uint64_t, 32> x{};
  std::array<std::uint64_t, 32> f{};
  std::uint64_t pc = 0;
  std::map<std::uint16_t, std::uint64_t> csrs;

  static ArchRegs reset(std::uint64_t entry);

  friend bool operator==(const ArchRegs&, const ArchRegs&) = default;
};

class MemoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat byte-addressable store. All accesses are 8 bytes, little endian.
class Memory {
 public:
  Memory() = default;
  explicit Memory(std::uint64_t footprint_bytes);

  /// Fills every aligned doubleword with a seed-derived pattern.
  static Memory patterned(std::uint64_t footprint_bytes, std::uint64_t seed);

  std::uint64_t size() const { return bytes_.size(); }
  bool in_bounds(std::uint64_t addr) const;
  std::uint64_t read64(std::uint64_t addr) const;
  void write64(std::uint64_t addr, std::uint64_t value);

  friend bool operator==(const Memory&, const Memory&) = default;

 private:
  std::vector<std::uint8_t> bytes_;
};

/// Non-repeatable CSR source: every read advances the counter of that CSR by
/// a value-dependent stride, the way a cycle counter would.
class CsrCounters {
 public:
  std::uint64_t peek(std::uint16_t id) const;
  void advance(std::uint16_t id);

  friend bool operator==(const CsrCounters&, const CsrCounters&) = default;

 private:
  std::map<std::uint16_t, std::uint64_t> values_;
};

struct RegWrite {
  bool fp = false;
  std::uint8_t index = 0;
  std::uint64_t value = 0;
  friend bool operator==(const RegWrite&, const RegWrite&) = default;
};

enum class MemKind : std::uint8_t { Load, Store };

struct MemOp {
  MemKind kind = MemKind::Load;
  std::uint64_t addr = 0;
  std::uint64_t data = 0;
  friend bool operator==(const MemOp&, const MemOp&) = default;
};

struct CsrAccess {
  std::uint16_t id = 0;
  std::uint64_t value = 0;
  friend bool operator==(const CsrAccess&, const CsrAccess&) = default;
};

struct ExecEffect {
  std::optional<RegWrite> reg;
  std::optional<MemOp> mem;
  std::optional<CsrAccess> csr;
  std::uint64_t next_pc = 0;
  /// Set by Trap: kernel entry requested, mepc/mcause updated on apply.
  bool trap = false;
  std::uint64_t trap_pc = 0;

  friend bool operator==(const ExecEffect&, const ExecEffect&) = default;
};

std::uint64_t read_reg(const ArchRegs& regs, bool fp, std::uint8_t idx);

/// Address of a Load/Store: value(src1) + imm.
std::uint64_t effective_address(const ArchRegs& regs, const Instruction& instr);

/// Computes the effect of `instr` at `regs.pc`. `load_value` is used for Load
/// results and `csr_value` for CsrRead results; the caller decides where
/// those come from (memory and counters, or a replay log).
ExecEffect evaluate(const ArchRegs& regs, const Instruction& instr,
                    std::uint64_t load_value, std::uint64_t csr_value);

/// Pure functional step against a memory image and CSR counter table.
ExecEffect exec_instr(const ArchRegs& regs, const Instruction& instr,
                      const Memory& memory, const CsrCounters& counters);

/// Applies register, pc and trap-CSR effects. Memory and counters are left to
/// the caller so that replay can skip them.
void apply_to_regs(ArchRegs& regs, const ExecEffect& effect);

/// Applies the full effect, including stores and CSR counter advance.
void apply_effect(ArchRegs& regs, Memory& memory, CsrCounters& counters,
                  const ExecEffect& effect);

}  // namespace paracheck

#endif  // PARACHECK_ISA_HPP
