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

#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "paracheck/little_core.hpp"

using namespace paracheck;
using paracheck::test::trace_of;

namespace {

constexpr std::uint32_t kCsrs = 2;

void push_checkpoint(Lsl& lsl, const ArchRegs& regs, std::uint64_t rcp, std::int64_t seq,
                     std::uint64_t flip_word = ~0ULL, std::uint64_t mask = 0) {
  std::vector<std::uint64_t> words = status_words(regs, kCsrs);
  if (flip_word < words.size()) words[flip_word] ^= mask;
  for (const StatusPacket& p : packetize(words, rcp, seq, RcpTrigger::Timeout, 4)) lsl.push_status(p);
}

struct Replay {
  std::vector<std::uint64_t> retire_cycles;
  std::optional<VerifyResult> result;
  std::uint64_t first_seq = 0;
};

/// Checks the whole trace as one segment. `corrupt` may edit the log entries
/// before they are forwarded.
template <typename F>
Replay replay(const Program& p, LittleTiming timing, F corrupt, std::uint64_t flip_word = ~0ULL,
              std::uint64_t mask = 0) {
  const FunctionalTrace t = trace_of(p);
  LittleCore core(1, p, timing, 1 << 20, kCsrs);
  core.assign({1, 1, -1, 7});
  push_checkpoint(core.lsl(), t.initial, 1, -1);
  std::vector<LogEntry> logs;
  for (const TraceEntry& e : t.entries) {
    if (auto l = log_entry_for(e)) logs.push_back(*l);
  }
  corrupt(logs);
  for (const LogEntry& l : logs) core.lsl().push_runtime(l);
  const auto last = static_cast<std::int64_t>(t.size()) - 1;
  core.close_segment(2, last);
  push_checkpoint(core.lsl(), t.final, 2, last, flip_word, mask);
  Replay r;
  bool first = true;
  for (std::uint64_t c = 0; c < 100000; ++c) {
    if (first && core.state() == LittleState::Replaying) {
      r.first_seq = static_cast<std::uint64_t>(core.next_seq());
      first = false;
    }
    const CheckOutcome o = core.check_cycle({c, last, true});
    if (o.retired) r.retire_cycles.push_back(c);
    if (o.result && !r.result) r.result = o.result;
    if (o.segment_done) break;
  }
  CHECK(core.free());
  CHECK(core.lsl().empty());
  return r;
}

Replay replay(const Program& p, LittleTiming timing = {}) {
  return replay(p, timing, [](std::vector<LogEntry>&) {});
}

}  // namespace

TEST_SUITE("little_core") {

TEST_CASE("a 67-word checkpoint applies only when all 17 chunks arrived") {
  ArchRegs regs = ArchRegs::reset(0);
  for (std::size_t i = 1; i < 32; ++i) regs.x[i] = 0x1000 + i;
  for (std::size_t i = 0; i < 32; ++i) regs.f[i] = 0x2000 + i;
  regs.pc = 3;
  const std::vector<std::uint64_t> words = status_words(regs, kCsrs);
  REQUIRE(words.size() == 67);
  const auto packets = packetize(words, 9, 41, RcpTrigger::Timeout, 4);
  REQUIRE(packets.size() == 17);

  const Program p = parse_program("nop\nnop\nnop\nnop\n");
  LittleCore core(1, p, {}, 1 << 16, kCsrs);
  core.assign({1, 9, 41, 3});
  for (std::size_t i = 0; i < 16; ++i) core.lsl().push_status(packets[i]);
  for (int c = 0; c < 5; ++c) {
    CHECK(core.check_cycle({static_cast<std::uint64_t>(c), 1000, true}).stall ==
          LittleStall::WaitingSrcp);
  }
  core.lsl().push_status(packets[16]);
  core.check_cycle({5, 1000, true});
  CHECK(core.state() == LittleState::Replaying);
  CHECK(status_words(core.regs(), kCsrs) == words);
  CHECK(core.next_seq() == 42);
}

TEST_CASE("a fault-free segment replays to Match") {
  const Program p = parse_program(
      "li x2, 64\nli x3, 0x55\nsd x3, 8(x2)\nld x4, 8(x2)\ncsrr x5, cycle\n"
      "fadd f1, f2, f3\nadd x6, x4, x3\n");
  const Replay r = replay(p);
  REQUIRE(r.result);
  CHECK(r.result->match());
  CHECK(r.retire_cycles.size() == 7);
  CHECK(r.first_seq == 0);  // SRCP taken at big seq -1
}

TEST_CASE("a flipped store data bit is a MemMismatch on the data field") {
  const Program p = parse_program("li x2, 64\nli x3, 0x55\nsd x3, 8(x2)\nnop\n");
  const Replay r = replay(p, {}, [](std::vector<LogEntry>& logs) {
    REQUIRE(logs.size() == 1);
    logs[0].data ^= 1ULL << 4;
  });
  REQUIRE(r.result);
  CHECK(r.result->outcome == Outcome::MemMismatch);
  CHECK(r.result->field == MismatchField::Data);
  CHECK(r.result->log_seq == 2);
}

TEST_CASE("a flipped address is a MemMismatch on the address field") {
  const Program p = parse_program("li x2, 64\nld x3, 8(x2)\n");
  const Replay r = replay(p, {}, [](std::vector<LogEntry>& logs) { logs.at(0).address ^= 8; });
  REQUIRE(r.result);
  CHECK(r.result->outcome == Outcome::MemMismatch);
  CHECK(r.result->field == MismatchField::Addr);
}

TEST_CASE("an ERCP register flip is a RegMismatch on that register") {
  const Program p = parse_program("li x7, 5\naddi x7, x7, 1\n");
  const Replay r = replay(p, {}, [](std::vector<LogEntry>&) {}, 7, 1ULL << 63);
  REQUIRE(r.result);
  CHECK(r.result->outcome == Outcome::RegMismatch);
  CHECK(r.result->reg_index == 7);
  CHECK(r.result->expected == (6ULL | (1ULL << 63)));
  CHECK(r.result->actual == 6);
}

TEST_CASE("compare_status reports the first differing word") {
  const std::vector<std::uint64_t> a = {1, 2, 3};
  CHECK(compare_status(a, a).match());
  const VerifyResult r = compare_status(a, {1, 9, 8});
  CHECK(r.outcome == Outcome::RegMismatch);
  CHECK(r.reg_index == 1);
}

TEST_CASE("divider latency follows the unroll factor") {
  const Program p = parse_program("li x1, 7\nli x2, 3\ndiv x3, x1, x2\naddi x4, x3, 1\n");
  for (auto [unroll, cycles] : {std::pair{8u, 8u}, std::pair{64u, 1u}, std::pair{1u, 64u}}) {
    CAPTURE(unroll);
    LittleTiming t;
    t.div_unroll = unroll;
    CHECK(t.div_cycles() == cycles);
    const Replay r = replay(p, t);
    REQUIRE(r.retire_cycles.size() == 4);
    CHECK(r.retire_cycles[2] - r.retire_cycles[1] == cycles);
    CHECK(r.retire_cycles[3] - r.retire_cycles[2] == 1);
  }
}

TEST_CASE("a dependent FP op waits for the FPU latency") {
  const Program dep = parse_program("fadd f1, f2, f3\nfadd f4, f1, f1\n");
  const Program indep = parse_program("fadd f1, f2, f3\nfadd f4, f2, f2\n");
  for (std::uint32_t lat : {1u, 3u, 5u}) {
    LittleTiming t;
    t.fpu_latency = lat;
    const Replay a = replay(dep, t);
    const Replay b = replay(indep, t);
    REQUIRE(a.retire_cycles.size() == 2);
    REQUIRE(b.retire_cycles.size() == 2);
    CHECK(a.retire_cycles[1] - a.retire_cycles[0] == lat);
    CHECK(b.retire_cycles[1] - b.retire_cycles[0] == 1);
  }
}

TEST_CASE("timing validation") {
  LittleTiming t;
  t.div_unroll = 3;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t.div_unroll = 128;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t.div_unroll = 8;
  t.fpu_latency = 0;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}

TEST_CASE("the lag guard holds replay at the big core's last committed instruction") {
  const Program p = parse_program("nop\nnop\nnop\nnop\n");
  const FunctionalTrace t = trace_of(p);
  for (bool guard : {true, false}) {
    LittleCore core(1, p, {}, 1 << 16, kCsrs);
    core.assign({1, 1, -1, 1});
    push_checkpoint(core.lsl(), t.initial, 1, -1);
    core.check_cycle({0, 1, guard});  // apply
    std::uint64_t retired = 0;
    for (std::uint64_t c = 1; c < 10; ++c) retired += core.check_cycle({c, 1, guard}).retired;
    // Big core has committed seq 0 and 1.
    CHECK(retired == (guard ? 1u : 2u));
    CHECK(core.check_cycle({10, 1, guard}).stall == LittleStall::LagGuard);
  }
}

TEST_CASE("msu operations") {
  const Program p = parse_program("nop\n");
  LittleCore core(1, p, {}, 1 << 16, kCsrs);
  CHECK_THROWS_AS(core.msu_exec(MsuOp::Mode, 1, false), PrivilegeTrap);
  core.msu_exec(MsuOp::Mode, 1, true);
  CHECK(core.msu().mode == CoreMode::Check);
  core.msu_exec(MsuOp::Record, 0, false);
  REQUIRE(core.msu().recorded_regs);
  CHECK(*core.msu().recorded_regs == core.regs());
  CHECK_FALSE(core.msu_exec(MsuOp::Apply, 0, false).applied);  // nothing in the LSL
  ArchRegs other = ArchRegs::reset(0);
  other.x[9] = 99;
  push_checkpoint(core.lsl(), other, 4, 10);
  CHECK(core.msu_exec(MsuOp::Apply, 0, false).applied);
  CHECK(core.regs().x[9] == 99);
  core.msu_exec(MsuOp::Jal, 0, false);
  CHECK(core.regs().pc == 0);
  CHECK_FALSE(core.msu_exec(MsuOp::Rslt, 0, false).result);  // no verify yet

  const Replay r = replay(parse_program("nop\n"));
  CHECK(r.result->match());
}

TEST_CASE("segment end restores the recorded application registers") {
  const Program p = parse_program("li x9, 4\n");
  const FunctionalTrace t = trace_of(p);
  LittleCore core(1, p, {}, 1 << 16, kCsrs);
  const ArchRegs before = core.regs();
  core.assign({1, 1, -1, 1});
  push_checkpoint(core.lsl(), t.initial, 1, -1);
  core.close_segment(2, 0);
  push_checkpoint(core.lsl(), t.final, 2, 0);
  CheckOutcome o;
  for (std::uint64_t c = 0; c < 10 && !o.segment_done; ++c) o = core.check_cycle({c, 0, true});
  REQUIRE(o.segment_done);
  CHECK(o.result->match());
  CHECK(core.regs() == before);
  CHECK(core.msu().mode == CoreMode::Application);
  CHECK_FALSE(core.lsl().reserved_for());
}

TEST_CASE("the LSL rejects overflow and keeps FIFO order") {
  Lsl lsl(3 * kLogEntryBytes);
  for (std::uint64_t i = 0; i < 3; ++i) lsl.push_runtime(LogEntry::make(LogKind::Load, i, i, i));
  CHECK(lsl.free() == 0);
  CHECK_THROWS_AS(lsl.push_runtime(LogEntry::make(LogKind::Load, 0, 0, 3)), LslOverflow);
  for (std::uint64_t i = 0; i < 3; ++i) CHECK(lsl.pop_runtime().seq == i);
  CHECK(lsl.occupied() == 0);
  lsl.reserve(4);
  CHECK_THROWS_AS(lsl.reserve(5), std::logic_error);
  lsl.release();
  CHECK_NOTHROW(lsl.reserve(5));
}

TEST_CASE("assigning a busy core is rejected") {
  const Program p = parse_program("nop\n");
  LittleCore core(1, p, {}, 1 << 16, kCsrs);
  core.assign({1, 1, -1, 1});
  CHECK_THROWS_AS(core.assign({2, 2, 0, 2}), std::logic_error);
}

}  // TEST_SUITE
