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

#include "paracheck/isa.hpp"

#include <bit>
#include <limits>

#include "paracheck/util.hpp"

namespace paracheck {

namespace {

constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "IntAlu", "Mul", "Div", "FpAlu", "Load", "Store",
    "Branch", "Jump", "CsrRead", "Trap", "Nop"};

}  // namespace

std::string_view class_name(InstrClass c) { return kClassNames[class_index(c)]; }

std::optional<InstrClass> class_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (iequals(kClassNames[i], name)) return static_cast<InstrClass>(i);
  }
  return std::nullopt;
}

InstrClass class_of(Opcode op) {
  switch (op) {
    case Opcode::Add: case Opcode::Sub: case Opcode::And: case Opcode::Or:
    case Opcode::Xor: case Opcode::Sll: case Opcode::Srl: case Opcode::Slt:
    case Opcode::Addi: case Opcode::Andi: case Opcode::Ori: case Opcode::Xori:
    case Opcode::Slli: case Opcode::Srli: case Opcode::Li:
      return InstrClass::IntAlu;
    case Opcode::Mul:
      return InstrClass::Mul;
    case Opcode::Div: case Opcode::Rem:
      return InstrClass::Div;
    case Opcode::Fadd: case Opcode::Fmul: case Opcode::FmvDX: case Opcode::FmvXD:
      return InstrClass::FpAlu;
    case Opcode::Ld:
      return InstrClass::Load;
    case Opcode::Sd:
      return InstrClass::Store;
    case Opcode::Beq: case Opcode::Bne: case Opcode::Blt: case Opcode::Bge:
      return InstrClass::Branch;
    case Opcode::Jal:
      return InstrClass::Jump;
    case Opcode::Csrr:
      return InstrClass::CsrRead;
    case Opcode::Ecall:
      return InstrClass::Trap;
    case Opcode::Nop:
      return InstrClass::Nop;
  }
  return InstrClass::Nop;
}

std::string_view mnemonic(Opcode op) {
  switch (op) {
    case Opcode::Add: return "add";
    case Opcode::Sub: return "sub";
    case Opcode::And: return "and";
    case Opcode::Or: return "or";
    case Opcode::Xor: return "xor";
    case Opcode::Sll: return "sll";
    case Opcode::Srl: return "srl";
    case Opcode::Slt: return "slt";
    case Opcode::Addi: return "addi";
    case Opcode::Andi: return "andi";
    case Opcode::Ori: return "ori";
    case Opcode::Xori: return "xori";
    case Opcode::Slli: return "slli";
    case Opcode::Srli: return "srli";
    case Opcode::Li: return "li";
    case Opcode::Mul: return "mul";
    case Opcode::Div: return "div";
    case Opcode::Rem: return "rem";
    case Opcode::Fadd: return "fadd";
    case Opcode::Fmul: return "fmul";
    case Opcode::FmvDX: return "fmv.d.x";
    case Opcode::FmvXD: return "fmv.x.d";
    case Opcode::Ld: return "ld";
    case Opcode::Sd: return "sd";
    case Opcode::Beq: return "beq";
    case Opcode::Bne: return "bne";
    case Opcode::Blt: return "blt";
    case Opcode::Bge: return "bge";
    case Opcode::Jal: return "jal";
    case Opcode::Csrr: return "csrr";
    case Opcode::Ecall: return "ecall";
    case Opcode::Nop: return "nop";
  }
  return "nop";
}

bool Instruction::dest_is_fp() const {
  return op == Opcode::Fadd || op == Opcode::Fmul || op == Opcode::FmvDX;
}

bool Instruction::src1_is_fp() const {
  return op == Opcode::Fadd || op == Opcode::Fmul || op == Opcode::FmvXD;
}

bool Instruction::src2_is_fp() const {
  return op == Opcode::Fadd || op == Opcode::Fmul;
}

bool Instruction::writes_reg() const {
  switch (cls()) {
    case InstrClass::IntAlu: case InstrClass::Mul: case InstrClass::Div:
    case InstrClass::FpAlu: case InstrClass::Load: case InstrClass::Jump:
    case InstrClass::CsrRead:
      return true;
    default:
      return false;
  }
}

bool Instruction::reads_src1() const {
  switch (op) {
    case Opcode::Li: case Opcode::Csrr: case Opcode::Ecall: case Opcode::Nop:
      return false;
    default:
      return true;
  }
}

bool Instruction::reads_src2() const {
  switch (op) {
    case Opcode::Add: case Opcode::Sub: case Opcode::And: case Opcode::Or:
    case Opcode::Xor: case Opcode::Sll: case Opcode::Srl: case Opcode::Slt:
    case Opcode::Mul: case Opcode::Div: case Opcode::Rem:
    case Opcode::Fadd: case Opcode::Fmul:
    case Opcode::Sd:
    case Opcode::Beq: case Opcode::Bne: case Opcode::Blt: case Opcode::Bge:
      return true;
    default:
      return false;
  }
}

ArchRegs ArchRegs::reset(std::uint64_t entry) {
  ArchRegs regs;
  regs.pc = entry;
  regs.csrs[kCsrMepc] = 0;
  regs.csrs[kCsrMcause] = 0;
  regs.csrs[kCsrMstatus] = 0x1800;
  regs.csrs[kCsrMscratch] = 0;
  return regs;
}

Memory::Memory(std::uint64_t footprint_bytes) : bytes_(footprint_bytes, 0) {}

Memory Memory::patterned(std::uint64_t footprint_bytes, std::uint64_t seed) {
  Memory mem(footprint_bytes);
  for (std::uint64_t addr = 0; addr + 8 <= footprint_bytes; addr += 8) {
    mem.write64(addr, splitmix64(seed ^ (addr * 0x9E3779B97F4A7C15ULL)));
  }
  return mem;
}

bool Memory::in_bounds(std::uint64_t addr) const {
  return addr <= bytes_.size() && bytes_.size() - addr >= 8;
}

std::uint64_t Memory::read64(std::uint64_t addr) const {
  if (!in_bounds(addr)) {
    throw MemoryError("load out of bounds at address " + std::to_string(addr));
  }
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes_[addr + i];
  return v;
}

void Memory::write64(std::uint64_t addr, std::uint64_t value) {
  if (!in_bounds(addr)) {
    throw MemoryError("store out of bounds at address " + std::to_string(addr));
  }
  for (int i = 0; i < 8; ++i) {
    bytes_[addr + i] = static_cast<std::uint8_t>(value >> (8 * i));
  }
}

std::uint64_t CsrCounters::peek(std::uint16_t id) const {
  auto it = values_.find(id);
  if (it != values_.end()) return it->second;
  return static_cast<std::uint64_t>(id) << 20;
}

void CsrCounters::advance(std::uint16_t id) {
  std::uint64_t v = peek(id);
  values_[id] = v + 1 + (splitmix64(v) & 0x3F);
}

std::uint64_t read_reg(const ArchRegs& regs, bool fp, std::uint8_t idx) {
  return fp ? regs.f[idx & 31] : regs.x[idx & 31];
}

std::uint64_t effective_address(const ArchRegs& regs, const Instruction& instr) {
  return regs.x[instr.src1 & 31] + static_cast<std::uint64_t>(instr.imm);
}

namespace {

std::uint64_t signed_div(std::uint64_t a, std::uint64_t b) {
  if (b == 0) return ~0ULL;
  auto sa = static_cast<std::int64_t>(a);
  auto sb = static_cast<std::int64_t>(b);
  if (sa == std::numeric_limits<std::int64_t>::min() && sb == -1) return a;
  return static_cast<std::uint64_t>(sa / sb);
}

std::uint64_t signed_rem(std::uint64_t a, std::uint64_t b) {
  if (b == 0) return a;
  auto sa = static_cast<std::int64_t>(a);
  auto sb = static_cast<std::int64_t>(b);
  if (sa == std::numeric_limits<std::int64_t>::min() && sb == -1) return 0;
  return static_cast<std::uint64_t>(sa % sb);
}

}  // namespace

ExecEffect evaluate(const ArchRegs& regs, const Instruction& in,
                    std::uint64_t load_value, std::uint64_t csr_value) {
  ExecEffect fx;
  const std::uint64_t pc = regs.pc;
  fx.next_pc = pc + 1;
  const std::uint64_t a = read_reg(regs, in.src1_is_fp(), in.src1);
  const std::uint64_t b = read_reg(regs, in.src2_is_fp(), in.src2);
  const auto imm = static_cast<std::uint64_t>(in.imm);

  std::optional<std::uint64_t> result;
  switch (in.op) {
    case Opcode::Add: result = a + b; break;
    case Opcode::Sub: result = a - b; break;
    case Opcode::And: result = a & b; break;
    case Opcode::Or: result = a | b; break;
    case Opcode::Xor: result = a ^ b; break;
    case Opcode::Sll: result = a << (b & 63); break;
    case Opcode::Srl: result = a >> (b & 63); break;
    case Opcode::Slt:
      result = static_cast<std::int64_t>(a) < static_cast<std::int64_t>(b) ? 1 : 0;
      break;
    case Opcode::Addi: result = a + imm; break;
    case Opcode::Andi: result = a & imm; break;
    case Opcode::Ori: result = a | imm; break;
    case Opcode::Xori: result = a ^ imm; break;
    case Opcode::Slli: result = a << (imm & 63); break;
    case Opcode::Srli: result = a >> (imm & 63); break;
    case Opcode::Li: result = imm; break;
    case Opcode::Mul: result = a * b; break;
    case Opcode::Div: result = signed_div(a, b); break;
    case Opcode::Rem: result = signed_rem(a, b); break;
    // FP opcodes mix integer payloads; only their latency class matters.
    case Opcode::Fadd: result = std::rotl(a, 7) + b; break;
    case Opcode::Fmul: result = (a * (b | 1)) ^ (a >> 29); break;
    case Opcode::FmvDX: result = a; break;
    case Opcode::FmvXD: result = a; break;
    case Opcode::Ld:
      fx.mem = MemOp{MemKind::Load, a + imm, load_value};
      result = load_value;
      break;
    case Opcode::Sd:
      fx.mem = MemOp{MemKind::Store, a + imm, b};
      break;
    case Opcode::Beq: if (a == b) fx.next_pc = pc + imm; break;
    case Opcode::Bne: if (a != b) fx.next_pc = pc + imm; break;
    case Opcode::Blt:
      if (static_cast<std::int64_t>(a) < static_cast<std::int64_t>(b)) fx.next_pc = pc + imm;
      break;
    case Opcode::Bge:
      if (static_cast<std::int64_t>(a) >= static_cast<std::int64_t>(b)) fx.next_pc = pc + imm;
      break;
    case Opcode::Jal:
      result = pc + 1;
      fx.next_pc = a + imm;
      break;
    case Opcode::Csrr:
      fx.csr = CsrAccess{in.csr, csr_value};
      result = csr_value;
      break;
    case Opcode::Ecall:
      fx.trap = true;
      fx.trap_pc = pc;
      break;
    case Opcode::Nop:
      break;
  }

  if (result) {
    const bool fp = in.dest_is_fp();
    if (fp || in.dest != 0) fx.reg = RegWrite{fp, in.dest, *result};
  }
  return fx;
}

ExecEffect exec_instr(const ArchRegs& regs, const Instruction& instr,
                      const Memory& memory, const CsrCounters& counters) {
  std::uint64_t load_value = 0;
  std::uint64_t csr_value = 0;
  if (instr.op == Opcode::Ld) {
    load_value = memory.read64(effective_address(regs, instr));
  } else if (instr.op == Opcode::Sd) {
    const std::uint64_t addr = effective_address(regs, instr);
    if (!memory.in_bounds(addr)) {
      throw MemoryError("store out of bounds at address " + std::to_string(addr));
    }
  } else if (instr.op == Opcode::Csrr) {
    csr_value = counters.peek(instr.csr);
  }
  return evaluate(regs, instr, load_value, csr_value);
}

void apply_to_regs(ArchRegs& regs, const ExecEffect& fx) {
  if (fx.reg) {
    if (fx.reg->fp) {
      regs.f[fx.reg->index & 31] = fx.reg->value;
    } else if (fx.reg->index != 0) {
      regs.x[fx.reg->index & 31] = fx.reg->value;
    }
  }
  if (fx.trap) {
    regs.csrs[kCsrMepc] = fx.trap_pc;
    regs.csrs[kCsrMcause] = kEcallCause;
  }
  regs.pc = fx.next_pc;
}

void apply_effect(ArchRegs& regs, Memory& memory, CsrCounters& counters,
                  const ExecEffect& fx) {
  if (fx.mem && fx.mem->kind == MemKind::Store) {
    memory.write64(fx.mem->addr, fx.mem->data);
  }
  if (fx.csr) counters.advance(fx.csr->id);
  apply_to_regs(regs, fx);
}

}  // namespace paracheck
