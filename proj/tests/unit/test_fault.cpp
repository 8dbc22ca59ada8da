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

#include <algorithm>
#include <bit>

#include "doctest.h"
#include "helpers.hpp"
#include "paracheck/fault.hpp"

using namespace paracheck;
using paracheck::test::small_suite;

namespace {

struct Run {
  std::vector<LogEntry> logs;
  std::optional<Detection> detection;
  std::optional<ArmedFault> fault;
  std::uint64_t committed = 0;
  std::uint64_t mismatches = 0;
};

Run run_with(const SimConfig& c, const Program& p, std::optional<FaultSpec> f) {
  const FunctionalTrace t = golden_trace(c, p);
  EngineOptions o;
  o.record_logs = true;
  Engine e(c, p, t, o);
  if (f) e.arm(*f);
  e.run();
  return {e.forwarded_logs(), e.detection(), e.fault(), e.big().committed(), e.mismatches()};
}

const LogEntry& nth_of(const std::vector<LogEntry>& logs, LogKind kind, std::size_t n) {
  std::size_t seen = 0;
  for (const LogEntry& e : logs) {
    if (e.kind == kind && seen++ == n) return e;
  }
  FAIL("not enough log entries");
  return logs.front();
}

}  // namespace

TEST_SUITE("fault_injection") {

TEST_CASE("a LogData flip changes exactly that bit of the delivered entry") {
  const Program p = small_suite("store-heavy");
  const SimConfig c;
  const Run clean = run_with(c, p, std::nullopt);
  const LogEntry& target = nth_of(clean.logs, LogKind::Store, 40);
  FaultSpec f;
  f.target = FaultTarget::LogData;
  f.seq = target.seq;
  f.bit = 3;
  const Run bad = run_with(c, p, f);
  REQUIRE(bad.fault->fired);
  // The run stops being comparable after detection; compare up to the target.
  std::size_t diffs = 0;
  for (std::size_t i = 0; i < bad.logs.size() && i < clean.logs.size(); ++i) {
    if (bad.logs[i] == clean.logs[i]) continue;
    ++diffs;
    CHECK(bad.logs[i].seq == target.seq);
    CHECK((bad.logs[i].data ^ clean.logs[i].data) == (1ULL << 3));
    CHECK(bad.logs[i].address == clean.logs[i].address);
  }
  CHECK(diffs == 1);
  REQUIRE(bad.detection);
  CHECK(bad.detection->detector == Detector::MemCompare);
  CHECK(bad.detection->result.field == MismatchField::Data);
  CHECK(bad.detection->result.log_seq == target.seq);
}

TEST_CASE("a StatusReg flip is caught on that register") {
  const Program p = small_suite("mixed-a");
  const SimConfig c;
  const FunctionalTrace t = golden_trace(c, p);
  const TargetSpace space = target_space(c, p, t);
  REQUIRE(space.checkpoints.size() >= 2);
  CHECK(space.status_words == 67);
  const auto it = std::find_if(space.checkpoints.begin(), space.checkpoints.end(),
                               [](const CheckpointRecord& r) { return r.rcp_id == 2; });
  REQUIRE(it != space.checkpoints.end());
  FaultSpec f;
  f.target = FaultTarget::StatusReg;
  f.rcp_id = 2;
  f.reg = 7;
  f.bit = 63;
  f.inject_at = InjectAt::OnCreate;
  const FaultRecord r = run_fault(c, p, t, f);
  CHECK(r.reachable);
  CHECK(r.detected);
  CHECK(r.detector == Detector::RegCompare);
}

TEST_CASE("an LSQ window flip raises a parity fault at forwarding") {
  const Program p = small_suite("load-heavy");
  const SimConfig c;
  const FunctionalTrace t = golden_trace(c, p);
  const Run clean = run_with(c, p, std::nullopt);
  const LogEntry& target = nth_of(clean.logs, LogKind::Load, 100);
  FaultSpec f;
  f.target = FaultTarget::LsqWindow;
  f.seq = target.seq;
  f.bit = 0;
  const FaultRecord r = run_fault(c, p, t, f);
  CHECK(r.detected);
  CHECK(r.detector == Detector::Parity);
  CHECK(r.detect_cycle == r.inject_cycle);

  // An even number of flipped bits keeps parity and travels on; the data is
  // consumed rather than compared, so it may or may not surface later.
  f.width = 2;
  const FaultRecord two = run_fault(c, p, t, f);
  CHECK(two.reachable);
  CHECK(two.detector != Detector::Parity);
}

TEST_CASE("latency bound arithmetic") {
  SimConfig c;
  CHECK(c.status_packets() == 17);
  CHECK(latency_bound(c) == 80066);
  c.little.div_unroll = 64;
  CHECK(latency_bound(c) == 10066);
  c.little.div_unroll = 8;
  c.timeout_instructions = 500;
  CHECK(latency_bound(c) == 8066);
  CHECK((latency_bound(c) - 66) * 10 == 80066 - 66);  // linear in the timeout
  SimConfig d;
  CHECK(static_cast<double>(latency_bound(d)) * d.big_period_ns() == doctest::Approx(25020.6).epsilon(1e-4));
}

TEST_CASE("nearest-rank quantile") {
  std::vector<double> v(10);
  for (int i = 0; i < 10; ++i) v[i] = i + 1;
  CHECK(quantile(v, 0.5) == 5);
  CHECK(quantile(v, 0.1) == 1);
  CHECK(quantile(v, 0.99) == 10);
  CHECK(quantile(v, 0.0) == 1);
  CHECK(quantile(v, 1.0) == 10);
  CHECK(quantile({}, 0.5) == 0);
}

TEST_CASE("summaries") {
  SimConfig c;
  std::vector<FaultRecord> rs(4);
  for (std::size_t i = 0; i < 3; ++i) {
    rs[i].detected = true;
    rs[i].inject_cycle = 10;
    rs[i].detect_cycle = 10 + 100 * (i + 1);
    rs[i].latency_ns = static_cast<double>(100 * (i + 1)) * c.big_period_ns();
  }
  const CampaignSummary s = summarize(rs, c);
  CHECK(s.faults == 4);
  CHECK(s.detected == 3);
  CHECK(s.detection_rate == doctest::Approx(0.75));
  CHECK(s.mean_ns == doctest::Approx(62.5));
  CHECK(s.max_cycles == 300);
  CHECK(s.max_ns == doctest::Approx(93.75));
  CHECK(summary_text(s).find("detection_rate = 0.750000\n") != std::string::npos);
}

TEST_CASE("campaigns detect every compared-field fault within the bound") {
  for (std::string_view name : {"mixed-b", "div-heavy", "fp-heavy"}) {
    CAPTURE(name);
    const Program p = small_suite(name, 2);
    const SimConfig c;
    const CampaignResult r = run_campaign(c, p, 300, 9);
    CHECK(r.records.size() == 300);
    CHECK(r.summary.detection_rate == 1.0);
    CHECK(r.summary.max_cycles <= latency_bound(c));
    CHECK(r.summary.mean_ns < r.summary.max_ns);
    for (const FaultRecord& rec : r.records) {
      CHECK(rec.reachable);
      CHECK(rec.detect_cycle >= rec.inject_cycle);
      CHECK(rec.latency_ns == doctest::Approx(rec.latency_cycles() * 0.3125));
    }
  }
}

TEST_CASE("campaigns are deterministic in the seed") {
  const Program p = small_suite("mixed-a", 5);
  const SimConfig c;
  auto rows = [&](std::uint64_t seed) {
    std::vector<std::string> out;
    for (const FaultRecord& r : run_campaign(c, p, 80, seed).records) out.push_back(fault_csv_row(r));
    return out;
  };
  CHECK(rows(4) == rows(4));
  CHECK(rows(4) != rows(5));
}

TEST_CASE("snapshot campaigns match fresh runs") {
  const Program p = small_suite("mixed-b", 3);
  const SimConfig c;
  const FunctionalTrace t = golden_trace(c, p);
  const CampaignResult r = run_campaign(c, p, 40, 2);
  for (const FaultRecord& rec : r.records) {
    const FaultRecord fresh = run_fault(c, p, t, rec.spec);
    CHECK(fresh.detected == rec.detected);
    CHECK(fresh.detector == rec.detector);
    CHECK(fresh.inject_cycle == rec.inject_cycle);
    CHECK(fresh.detect_cycle == rec.detect_cycle);
  }
}

TEST_CASE("faults never reach the big core") {
  const Program p = small_suite("store-heavy", 6);
  const SimConfig c;
  const FunctionalTrace before = golden_trace(c, p);
  const Run clean = run_with(c, p, std::nullopt);
  FaultSpec f;
  f.target = FaultTarget::LogAddr;
  f.seq = nth_of(clean.logs, LogKind::Store, 10).seq;
  f.bit = 12;
  const Run bad = run_with(c, p, f);
  CHECK(bad.committed == clean.committed);
  CHECK(bad.committed == before.size());
  CHECK(bad.mismatches >= 1);
  // The forwarded stream differs only in the flipped entry.
  REQUIRE(bad.logs.size() == clean.logs.size());
  std::size_t diffs = 0;
  for (std::size_t i = 0; i < bad.logs.size(); ++i) diffs += !(bad.logs[i] == clean.logs[i]);
  CHECK(diffs == 1);
  CHECK(golden_trace(c, p).entries == before.entries);
}

TEST_CASE("generated faults stay in the target space") {
  const Program p = small_suite("mixed-a");
  const SimConfig c;
  const FunctionalTrace t = golden_trace(c, p);
  const TargetSpace space = target_space(c, p, t);
  for (TargetSet set : {TargetSet::Compared, TargetSet::All}) {
    const auto faults = generate_faults(space, 2000, 1, set);
    REQUIRE(faults.size() == 2000);
    bool saw_csr = false, saw_status = false;
    for (const FaultSpec& f : faults) {
      CHECK(f.bit < 64);
      CHECK(f.width == 1);
      if (f.target == FaultTarget::StatusReg) {
        saw_status = true;
        CHECK(f.reg < space.status_words);
      } else {
        CHECK(f.seq < t.size());
      }
      saw_csr |= f.target == FaultTarget::CsrData;
    }
    CHECK(saw_status);
    CHECK(saw_csr == (set == TargetSet::All));
  }
  CHECK_THROWS_AS(run_campaign(c, p, 0, 1), std::invalid_argument);
}

TEST_CASE("fault CSV rows") {
  FaultRecord r;
  r.fault_idx = 3;
  r.spec.target = FaultTarget::StatusReg;
  r.spec.rcp_id = 2;
  r.spec.reg = 7;
  r.spec.bit = 63;
  r.detected = true;
  r.detector = Detector::RegCompare;
  r.inject_cycle = 100;
  r.detect_cycle = 420;
  r.latency_ns = 100.0;
  CHECK(fault_csv_row(r) == "3,StatusReg:r7,2,63,1,RegCompare,100,420,100");
  r.reachable = false;
  r.detected = false;
  CHECK(fault_csv_row(r).find(",Unreachable,") != std::string::npos);
  CHECK(faults_csv_header() ==
        "fault_idx,target,seq,bit,detected,detector,inject_cycle,detect_cycle,latency_ns");
  FaultSpec wide;
  wide.bit = 62;
  wide.width = 4;
  CHECK(wide.flip_mask() == (3ULL << 62));
  CHECK(std::popcount(FaultSpec{}.flip_mask()) == 1);
}

}  // TEST_SUITE
