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

#include "paracheck/workload.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "paracheck/util.hpp"

namespace paracheck {

namespace {

// Register roles inside generated programs.
constexpr std::uint8_t kLoopReg = 1;
constexpr std::uint8_t kBaseLo = 2;
constexpr std::uint8_t kBaseHi = 3;
constexpr std::uint8_t kPoolFirst = 4;
constexpr std::uint8_t kPoolSize = 28;  // x4..x31

// Prologue: li x1, li x2, li x3 and one li per pool register.
constexpr std::size_t kPrologueAlu = 3 + kPoolSize;
// Loop control: addi x1, x1, -1 ; bne x1, x0, loop
constexpr std::size_t kControlAlu = 1;
constexpr std::size_t kControlBranch = 1;

/// splitmix64 stream; std distributions are implementation-defined and would
/// break byte-identical output across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return splitmix64(state_);
  }
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }
  std::uint8_t pool_reg() { return static_cast<std::uint8_t>(kPoolFirst + below(kPoolSize)); }
  std::uint8_t fp_reg() { return static_cast<std::uint8_t>(below(32)); }

 private:
  std::uint64_t state_;
};

}  // namespace

void InstrMix::validate() const {
  double sum = 0;
  for (double f : fractions) {
    if (!(f >= 0.0) || !std::isfinite(f)) throw WorkloadError("mix fractions must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw WorkloadError("mix fractions sum to " + std::to_string(sum) + ", expected 1.0");
  }
  if (loop_count == 0) throw WorkloadError("loop_count must be at least 1");
  if (length < kPrologueAlu + kControlAlu + kControlBranch + 1) {
    throw WorkloadError("length " + std::to_string(length) + " too small for prologue and loop");
  }
  const bool memory = fraction(InstrClass::Load) > 0 || fraction(InstrClass::Store) > 0;
  if (memory && memory_footprint_bytes < 16) {
    throw WorkloadError("mix has memory operations but footprint is " +
                        std::to_string(memory_footprint_bytes) + " bytes");
  }
  if (memory_footprint_bytes % 8 != 0) {
    throw WorkloadError("memory footprint must be a multiple of 8 bytes");
  }
}

InstrMix parse_mix(std::string_view spec) {
  InstrMix mix;
  for (std::string_view item : split(spec, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string_view::npos) throw WorkloadError("bad mix item '" + std::string(item) + "'");
    auto cls = class_from_name(trim(item.substr(0, eq)));
    if (!cls) throw WorkloadError("unknown class '" + std::string(item.substr(0, eq)) + "'");
    const std::string value(trim(item.substr(eq + 1)));
    try {
      std::size_t used = 0;
      double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      mix.set(*cls, v);
    } catch (const std::exception&) {
      throw WorkloadError("bad fraction '" + value + "'");
    }
  }
  return mix;
}

std::string format_mix(const InstrMix& mix) {
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (mix.fractions[i] == 0.0) continue;
    if (!first) os << ",";
    first = false;
    os << class_name(static_cast<InstrClass>(i)) << "=" << mix.fractions[i];
  }
  return os.str();
}

Program gen_workload(const InstrMix& mix) {
  mix.validate();
  Rng rng(mix.seed);

  // Apportion the loop body over classes so the whole program's static
  // histogram tracks the requested fractions (largest-remainder rounding).
  const std::size_t fixed = kPrologueAlu + kControlAlu + kControlBranch;
  const std::size_t body = mix.length - fixed;
  std::array<double, kNumClasses> want{};
  double want_sum = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    double w = mix.fractions[c] * static_cast<double>(mix.length);
    if (c == class_index(InstrClass::IntAlu)) w -= kPrologueAlu + kControlAlu;
    if (c == class_index(InstrClass::Branch)) w -= kControlBranch;
    want[c] = std::max(0.0, w);
    want_sum += want[c];
  }
  if (want_sum <= 0) want[class_index(InstrClass::IntAlu)] = want_sum = 1.0;

  std::array<std::size_t, kNumClasses> count{};
  std::array<double, kNumClasses> rem{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double exact = want[c] / want_sum * static_cast<double>(body);
    count[c] = static_cast<std::size_t>(std::floor(exact));
    rem[c] = exact - std::floor(exact);
    assigned += count[c];
  }
  while (assigned < body) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumClasses; ++c) {
      if (rem[c] > rem[best]) best = c;
    }
    ++count[best];
    rem[best] = -1.0;
    ++assigned;
  }

  std::vector<InstrClass> order;
  order.reserve(body);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    order.insert(order.end(), count[c], static_cast<InstrClass>(c));
  }
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }

  Program prog;
  auto li = [&](std::uint8_t rd, std::int64_t v) {
    Instruction in;
    in.op = Opcode::Li;
    in.dest = rd;
    in.imm = v;
    prog.code.push_back(in);
  };
  const std::uint64_t footprint = mix.memory_footprint_bytes;
  const std::uint64_t half = (footprint / 2) & ~7ULL;
  li(kLoopReg, static_cast<std::int64_t>(mix.loop_count));
  li(kBaseLo, 0);
  li(kBaseHi, static_cast<std::int64_t>(half));
  for (std::uint8_t r = 0; r < kPoolSize; ++r) {
    li(static_cast<std::uint8_t>(kPoolFirst + r), static_cast<std::int64_t>(rng.next() >> 1));
  }

  const std::size_t loop_start = prog.code.size();
  const std::size_t control = loop_start + body;
  prog.labels["loop"] = loop_start;

  static constexpr std::array<Opcode, 14> kAluOps = {
      Opcode::Add, Opcode::Sub, Opcode::Xor, Opcode::Or, Opcode::And, Opcode::Sll,
      Opcode::Srl, Opcode::Slt, Opcode::Addi, Opcode::Xori, Opcode::Ori,
      Opcode::Andi, Opcode::Slli, Opcode::Srli};
  static constexpr std::array<Opcode, 4> kBranchOps = {Opcode::Beq, Opcode::Bne,
                                                       Opcode::Blt, Opcode::Bge};
  static constexpr std::array<std::uint16_t, 3> kCounters = {0xC00, 0xC01, 0xC02};

  auto mem_operand = [&](Instruction& in) {
    const std::uint64_t slots = footprint / 8;
    const std::uint64_t addr = rng.below(slots) * 8;
    if (half > 0 && (rng.next() & 1)) {
      in.src1 = kBaseHi;
      in.imm = static_cast<std::int64_t>(addr) - static_cast<std::int64_t>(half);
    } else {
      in.src1 = kBaseLo;
      in.imm = static_cast<std::int64_t>(addr);
    }
  };

  for (std::size_t i = 0; i < body; ++i) {
    const std::size_t index = loop_start + i;
    Instruction in;
    switch (order[i]) {
      case InstrClass::IntAlu: {
        in.op = kAluOps[rng.below(kAluOps.size())];
        in.dest = rng.pool_reg();
        in.src1 = rng.pool_reg();
        if (in.reads_src2()) {
          in.src2 = rng.pool_reg();
        } else if (in.op == Opcode::Slli || in.op == Opcode::Srli) {
          in.imm = static_cast<std::int64_t>(rng.below(64));
        } else {
          in.imm = static_cast<std::int64_t>(rng.below(4096)) - 2048;
        }
        break;
      }
      case InstrClass::Mul:
        in.op = Opcode::Mul;
        in.dest = rng.pool_reg();
        in.src1 = rng.pool_reg();
        in.src2 = rng.pool_reg();
        break;
      case InstrClass::Div:
        in.op = rng.below(4) == 0 ? Opcode::Rem : Opcode::Div;
        in.dest = rng.pool_reg();
        in.src1 = rng.pool_reg();
        in.src2 = rng.pool_reg();
        break;
      case InstrClass::FpAlu: {
        const auto pick = rng.below(10);
        if (pick < 6) {
          in.op = pick < 3 ? Opcode::Fadd : Opcode::Fmul;
          in.dest = rng.fp_reg();
          in.src1 = rng.fp_reg();
          in.src2 = rng.fp_reg();
        } else if (pick < 8) {
          in.op = Opcode::FmvDX;
          in.dest = rng.fp_reg();
          in.src1 = rng.pool_reg();
        } else {
          in.op = Opcode::FmvXD;
          in.dest = rng.pool_reg();
          in.src1 = rng.fp_reg();
        }
        break;
      }
      case InstrClass::Load:
        in.op = Opcode::Ld;
        in.dest = rng.pool_reg();
        mem_operand(in);
        break;
      case InstrClass::Store:
        in.op = Opcode::Sd;
        in.src2 = rng.pool_reg();
        mem_operand(in);
        break;
      case InstrClass::Branch: {
        in.op = kBranchOps[rng.below(kBranchOps.size())];
        in.src1 = rng.pool_reg();
        in.src2 = rng.pool_reg();
        const std::size_t max_skip = std::min<std::size_t>(3, control - index - 1);
        in.imm = static_cast<std::int64_t>(1 + rng.below(max_skip + 1));
        break;
      }
      case InstrClass::Jump:
        in.op = Opcode::Jal;
        in.dest = rng.pool_reg();
        in.src1 = 0;
        in.imm = static_cast<std::int64_t>(index + 1);
        break;
      case InstrClass::CsrRead:
        in.op = Opcode::Csrr;
        in.dest = rng.pool_reg();
        in.csr = kCounters[rng.below(kCounters.size())];
        break;
      case InstrClass::Trap:
        in.op = Opcode::Ecall;
        break;
      case InstrClass::Nop:
        in.op = Opcode::Nop;
        break;
    }
    prog.code.push_back(in);
  }

  Instruction dec;
  dec.op = Opcode::Addi;
  dec.dest = kLoopReg;
  dec.src1 = kLoopReg;
  dec.imm = -1;
  prog.code.push_back(dec);
  Instruction back;
  back.op = Opcode::Bne;
  back.src1 = kLoopReg;
  back.src2 = 0;
  back.imm = static_cast<std::int64_t>(loop_start) - static_cast<std::int64_t>(control + 1);
  prog.code.push_back(back);
  return prog;
}

namespace {

struct SuiteDef {
  const char* name;
  std::vector<std::pair<InstrClass, double>> mix;
};

// Fractions per member; the memory footprint is shared.
const std::vector<SuiteDef>& suite_defs() {
  using C = InstrClass;
  static const std::vector<SuiteDef> defs = {
      {"alu-uniform", {{C::IntAlu, 0.70}, {C::Load, 0.12}, {C::Store, 0.08},
                       {C::Branch, 0.08}, {C::Jump, 0.02}}},
      {"load-heavy", {{C::IntAlu, 0.40}, {C::Load, 0.35}, {C::Store, 0.10},
                      {C::Branch, 0.12}, {C::Jump, 0.03}}},
      {"store-heavy", {{C::IntAlu, 0.45}, {C::Load, 0.12}, {C::Store, 0.30},
                       {C::Branch, 0.10}, {C::Jump, 0.03}}},
      {"div-heavy", {{C::IntAlu, 0.50}, {C::Div, 0.12}, {C::Mul, 0.08},
                     {C::Load, 0.14}, {C::Store, 0.08}, {C::Branch, 0.08}}},
      {"fp-heavy", {{C::FpAlu, 0.45}, {C::IntAlu, 0.20}, {C::Mul, 0.02},
                    {C::Load, 0.15}, {C::Store, 0.08}, {C::Branch, 0.10}}},
      {"branch-heavy", {{C::Branch, 0.30}, {C::IntAlu, 0.40}, {C::Jump, 0.08},
                        {C::Load, 0.12}, {C::Store, 0.08}, {C::Nop, 0.02}}},
      {"mixed-a", {{C::IntAlu, 0.40}, {C::Mul, 0.06}, {C::Div, 0.02}, {C::FpAlu, 0.10},
                   {C::Load, 0.18}, {C::Store, 0.10}, {C::Branch, 0.10},
                   {C::Jump, 0.02}, {C::CsrRead, 0.02}}},
      {"mixed-b", {{C::IntAlu, 0.38}, {C::Mul, 0.05}, {C::Div, 0.03}, {C::FpAlu, 0.08},
                   {C::Load, 0.20}, {C::Store, 0.12}, {C::Branch, 0.10},
                   {C::Jump, 0.02}, {C::CsrRead, 0.015}, {C::Trap, 0.0005},
                   {C::Nop, 0.0045}}},
  };
  return defs;
}

NamedWorkload make_member(const SuiteDef& def, std::size_t length, std::uint64_t loop_count,
                          std::uint64_t seed) {
  NamedWorkload w;
  w.name = def.name;
  for (const auto& [c, f] : def.mix) w.mix.set(c, f);
  w.mix.length = length;
  w.mix.loop_count = loop_count;
  w.mix.memory_footprint_bytes = 65536;
  w.mix.seed = seed;
  return w;
}

}  // namespace

std::vector<NamedWorkload> workload_suite(std::size_t length, std::uint64_t loop_count,
                                          std::uint64_t seed) {
  std::vector<NamedWorkload> out;
  for (const auto& def : suite_defs()) out.push_back(make_member(def, length, loop_count, seed));
  return out;
}

NamedWorkload suite_member(std::string_view name, std::size_t length, std::uint64_t loop_count,
                           std::uint64_t seed) {
  for (const auto& def : suite_defs()) {
    if (name == def.name) return make_member(def, length, loop_count, seed);
  }
  throw WorkloadError("unknown suite workload '" + std::string(name) + "'");
}

std::array<std::size_t, kNumClasses> class_histogram(const Program& program) {
  std::array<std::size_t, kNumClasses> h{};
  for (const auto& in : program.code) ++h[class_index(in.cls())];
  return h;
}

}  // namespace paracheck
