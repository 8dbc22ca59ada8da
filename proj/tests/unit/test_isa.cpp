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

#include <map>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "paracheck/functional.hpp"
#include "paracheck/isa.hpp"
#include "paracheck/program.hpp"
#include "paracheck/workload.hpp"

using namespace paracheck;

TEST_SUITE("isa_core") {

TEST_CASE("parse register-register add") {
  const Program p = parse_program("add x1, x2, x3");
  REQUIRE(p.size() == 1);
  CHECK(p.code[0].cls() == InstrClass::IntAlu);
  CHECK(p.code[0].dest == 1);
  CHECK(p.code[0].src1 == 2);
  CHECK(p.code[0].src2 == 3);
}

TEST_CASE("parse load with offset") {
  const Program p = parse_program("ld x5, 16(x2)");
  REQUIRE(p.size() == 1);
  CHECK(p.code[0].cls() == InstrClass::Load);
  CHECK(p.code[0].dest == 5);
  CHECK(p.code[0].src1 == 2);
  CHECK(p.code[0].imm == 16);
}

TEST_CASE("branch immediate is instruction-index relative") {
  const Program p = parse_program(
      "nop\nnop\nnop\n"
      "loop: addi x1, x1, 1\n"
      "nop\nnop\nnop\n"
      "beq x1, x0, loop\n");
  REQUIRE(p.labels.at("loop") == 3);
  REQUIRE(p.code[7].cls() == InstrClass::Branch);
  // Hand count: label index 3 minus branch index 7.
  CHECK(p.code[7].imm == 3 - 7);
}

TEST_CASE("parse errors carry line numbers") {
  CHECK_THROWS_WITH_AS(parse_program("nop\nfoo x1, x2\n"), doctest::Contains("line 2"),
                       ParseError);
  CHECK_THROWS_AS(parse_program("beq x1, x0, nowhere\n"), ParseError);
  CHECK_THROWS_AS(parse_program("add x1, x2, x32\n"), ParseError);
  CHECK_THROWS_AS(parse_program("a: nop\na: nop\n"), ParseError);
}

TEST_CASE("comments and format round trip") {
  const std::string text =
      "# header\n    li x2, 64   # base\nloop:\n    ld x5, 8(x2)\n    sd x5, 16(x2)\n"
      "    csrr x6, cycle\n    fadd f1, f2, f3\n    div x7, x5, x6\n    bne x7, x0, loop\n";
  const Program a = parse_program(text);
  const Program b = parse_program(format_program(a));
  CHECK(a.code == b.code);
}

TEST_CASE("writes to x0 are discarded") {
  const Program p = parse_program("addi x0, x0, 5");
  ArchRegs r = ArchRegs::reset(0);
  const ExecEffect fx = exec_instr(r, p.code[0], Memory(64), CsrCounters{});
  apply_to_regs(r, fx);
  CHECK(r.x[0] == 0);
  CHECK(r.pc == 1);
}

TEST_CASE("division by zero returns all ones") {
  const Program p = parse_program("li x1, 7\nli x2, 0\ndiv x3, x1, x2\n");
  Memory mem(64);
  const FunctionalTrace t = run_functional(p, mem, 100);
  CHECK(t.final.x[3] == 0xFFFF'FFFF'FFFF'FFFFULL);
}

TEST_CASE("load records its memory operation") {
  const Program p = parse_program("li x2, 24\nld x5, 0(x2)\n");
  Memory mem(64);
  mem.write64(24, 0x2A);
  const FunctionalTrace t = run_functional(p, mem, 100);
  CHECK(t.final.x[5] == 0x2A);
  REQUIRE(t.entries[1].effect.mem.has_value());
  CHECK(t.entries[1].effect.mem->kind == MemKind::Load);
  CHECK(t.entries[1].effect.mem->addr == 24);
  CHECK(t.entries[1].effect.mem->data == 0x2A);
}

// A minimal independent interpreter for li/addi/add/sd/ld over a word map.
struct RefMachine {
  std::array<std::uint64_t, 32> x{};
  std::map<std::uint64_t, std::uint64_t> mem;
  void step(const Instruction& in) {
    const std::uint64_t a = x[in.src1], b = x[in.src2];
    const auto imm = static_cast<std::uint64_t>(in.imm);
    std::uint64_t v = 0;
    switch (in.op) {
      case Opcode::Li: v = imm; break;
      case Opcode::Addi: v = a + imm; break;
      case Opcode::Add: v = a + b; break;
      case Opcode::Sd: mem[a + imm] = b; return;
      case Opcode::Ld: v = mem.count(a + imm) ? mem[a + imm] : 0; break;
      default: FAIL("unsupported"); return;
    }
    if (in.dest != 0) x[in.dest] = v;
  }
};

TEST_CASE("functional trace agrees with a reference interpreter") {
  const Program p = parse_program(
      "li x2, 40\nli x3, 0x2A\nsd x3, 8(x2)\nld x5, 8(x2)\nadd x6, x5, x3\n");
  Memory mem(256);
  const FunctionalTrace t = run_functional(p, mem, 100);
  RefMachine ref;
  for (const Instruction& in : p.code) ref.step(in);
  CHECK(t.final.x == ref.x);
  CHECK(t.final.x[5] == 0x2A);
  CHECK(mem.read64(48) == ref.mem.at(48));
}

TEST_CASE("exec_instr is pure") {
  const Program p = parse_program("csrr x1, cycle\nld x2, 8(x0)\nfmul f1, f2, f3\n");
  const Memory mem = Memory::patterned(64, 3);
  const CsrCounters counters;
  const ArchRegs r = ArchRegs::reset(0);
  for (const Instruction& in : p.code) {
    CHECK(exec_instr(r, in, mem, counters) == exec_instr(r, in, mem, counters));
  }
}

TEST_CASE("CSR reads are not repeatable") {
  const Program p = parse_program("csrr x1, cycle\ncsrr x2, cycle\n");
  Memory mem(64);
  const FunctionalTrace t = run_functional(p, mem, 10);
  CHECK(t.final.x[1] != t.final.x[2]);
}

TEST_CASE("ecall records the trap CSRs") {
  const Program p = parse_program("nop\necall\nnop\n");
  Memory mem(64);
  const FunctionalTrace t = run_functional(p, mem, 10);
  CHECK(t.entries[1].effect.trap);
  CHECK(t.final.csrs.at(kCsrMepc) == 1);
  CHECK(t.final.csrs.at(kCsrMcause) == kEcallCause);
}

TEST_CASE("run_functional: empty, straight-line, runaway") {
  Memory mem(64);
  CHECK(run_functional(Program{}, mem, 10).empty());
  const FunctionalTrace t = run_functional(parse_program("nop\nnop\nnop\n"), mem, 10);
  REQUIRE(t.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(t.entries[i].seq == i);
  CHECK_THROWS_AS(run_functional(parse_program("l: j l\n"), mem, 1000), RunawayError);
}

TEST_CASE("out-of-bounds access is an error") {
  Memory mem(64);
  CHECK_THROWS_AS(run_functional(parse_program("li x1, 60\nld x2, 0(x1)\n"), mem, 10),
                  MemoryError);
}

TEST_CASE("gen_workload realizes the Div fraction") {
  InstrMix mix = parse_mix("Div=0.3,IntAlu=0.7");
  mix.length = 10000;
  mix.seed = 1;
  const Program p = gen_workload(mix);
  const auto h = class_histogram(p);
  CHECK(h[class_index(InstrClass::Div)] >= 2800);
  CHECK(h[class_index(InstrClass::Div)] <= 3200);
}

TEST_CASE("gen_workload is deterministic in the seed") {
  InstrMix mix = parse_mix("IntAlu=0.5,Load=0.2,Store=0.2,Branch=0.1");
  mix.length = 5000;
  mix.seed = 9;
  CHECK(format_program(gen_workload(mix)) == format_program(gen_workload(mix)));
  InstrMix other = mix;
  other.seed = 10;
  CHECK(format_program(gen_workload(mix)) != format_program(gen_workload(other)));
}

TEST_CASE("gen_workload stays inside the memory footprint") {
  InstrMix mix = parse_mix("Load=0.25,Store=0.25,IntAlu=0.5");
  mix.length = 10000;
  mix.loop_count = 3;
  mix.memory_footprint_bytes = 4096;
  const Program p = gen_workload(mix);
  Memory mem(mix.memory_footprint_bytes);
  const FunctionalTrace t = run_functional(p, mem, 1'000'000);
  std::size_t ops = 0;
  for (const TraceEntry& e : t.entries) {
    if (!e.effect.mem) continue;
    ++ops;
    CHECK(e.effect.mem->addr + 8 <= mix.memory_footprint_bytes);
  }
  CHECK(ops > 4000);
}

TEST_CASE("gen_workload rejects infeasible mixes") {
  CHECK_THROWS_AS(parse_mix("Bogus=1.0"), WorkloadError);
  InstrMix m = parse_mix("IntAlu=0.5,Load=0.2");
  CHECK_THROWS_AS(gen_workload(m), WorkloadError);
  InstrMix s = parse_mix("Store=1.0");
  s.memory_footprint_bytes = 0;
  CHECK_THROWS_AS(gen_workload(s), WorkloadError);
}

TEST_CASE("every suite member realizes its mix within 2%") {
  const auto suite = workload_suite(10000, 1, 1);
  REQUIRE(suite.size() == 8);
  const std::set<std::string> names = {"alu-uniform", "load-heavy", "store-heavy", "div-heavy",
                                       "fp-heavy", "branch-heavy", "mixed-a", "mixed-b"};
  for (const NamedWorkload& w : suite) {
    CAPTURE(w.name);
    CHECK(names.count(w.name) == 1);
    const Program p = gen_workload(w.mix);
    const auto h = class_histogram(p);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const double got = static_cast<double>(h[c]) / static_cast<double>(p.size());
      CHECK(std::abs(got - w.mix.fractions[c]) <= 0.02);
    }
  }
}

TEST_CASE("x0 stays zero over generated workloads") {
  for (const char* name : {"mixed-a", "mixed-b", "fp-heavy"}) {
    const FunctionalTrace t = test::trace_of(test::small_suite(name));
    CHECK(t.final.x[0] == 0);
    for (std::size_t i = 0; i < t.size(); ++i) REQUIRE(t.entries[i].seq == i);
  }
}

}  // TEST_SUITE
