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
 * @file os_model.hpp
 * @brief Kernel-visible behavior: checker hooking and dispatch, context
 *        switch sequences, thread pinning, the lag guard, and an
 *        event-scripted page/lock model for the checker deadlock.
 */

#ifndef PARACHECK_OS_MODEL_HPP
#define PARACHECK_OS_MODEL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace paracheck {

class HookError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CheckerState : std::uint8_t { WaitingSrcp, Replaying, Verifying, Done };

struct CheckerThread {
  std::uint32_t tid = 0;
  std::uint32_t assigned_little = 0;
  CheckerState state = CheckerState::WaitingSrcp;
  std::optional<std::uint64_t> segment;
};

class HookTable {
 public:
  /// Associates checkers with a big core. Throws HookError if any little
  /// core is already hooked (to any big core) or listed twice.
  void hook(std::uint32_t big_id, const std::vector<std::uint32_t>& little_ids);

  bool is_hooked(std::uint32_t little_id) const { return owner_.count(little_id) != 0; }
  std::optional<std::uint32_t> owner_of(std::uint32_t little_id) const;
  const std::vector<std::uint32_t>& littles_of(std::uint32_t big_id) const;
  std::size_t available(std::uint32_t big_id) const;

  bool is_free(std::uint32_t little_id) const;
  void set_free(std::uint32_t little_id, bool free);

  /// Next free hooked checker in round-robin order, or nullopt
  /// (NoFreeChecker). Marks the chosen checker busy.
  std::optional<std::uint32_t> dispatch_segment(std::uint32_t big_id);

 private:
  std::map<std::uint32_t, std::vector<std::uint32_t>> hooks_;
  std::map<std::uint32_t, std::uint32_t> owner_;
  std::map<std::uint32_t, bool> free_;
  std::map<std::uint32_t, std::size_t> rr_;
};

/// Checker-thread bookkeeping for one big core's segments.
class CheckerRegistry {
 public:
  CheckerThread& spawn(std::uint32_t little, std::uint64_t segment);
  CheckerThread& on(std::uint32_t little);
  const CheckerThread* find(std::uint32_t little) const;
  void finish(std::uint32_t little);
  std::uint32_t spawned() const { return next_tid_ - kFirstTid; }

 private:
  static constexpr std::uint32_t kFirstTid = 1000;
  std::uint32_t next_tid_ = kFirstTid;
  std::map<std::uint32_t, CheckerThread> active_;
};

struct ConfigEffect {
  enum class Kind : std::uint8_t { CheckDisable, Hook, CheckEnable };
  Kind kind = Kind::CheckDisable;
  std::uint32_t big = 0;
  std::uint32_t little = 0;
  friend bool operator==(const ConfigEffect&, const ConfigEffect&) = default;
};

struct Task {
  std::uint32_t tid = 0;
  bool is_checker = false;
  /// Set for a task that enters checking for the first time at this switch.
  bool newly_released = false;
  std::vector<std::uint32_t> checker_index;
};

/// Big-core switch: disable checking, hook checkers of a newly released
/// task, re-enable checking.
std::vector<ConfigEffect> context_switch_big(HookTable& hooks, std::uint32_t big_id,
                                             const Task& current, const Task& next);

enum class CoreMode : std::uint8_t { Application, Check };

/// Little-core switch: always drop to Application, enter Check only for a
/// checker thread.
std::vector<CoreMode> context_switch_little(const Task& current, const Task& next);

enum class MigrationVerdict : std::uint8_t { Granted, Deferred };

/// Checker threads stay on their little core until their segment completes.
class PinTable {
 public:
  void pin(std::uint32_t tid) { pinned_.insert(tid); }
  void unpin(std::uint32_t tid);
  bool pinned(std::uint32_t tid) const { return pinned_.count(tid) != 0; }
  MigrationVerdict request_migration(std::uint32_t tid);
  const std::vector<std::uint32_t>& deferred() const { return deferred_; }

 private:
  std::set<std::uint32_t> pinned_;
  std::vector<std::uint32_t> deferred_;
};

enum class LagVerdict : std::uint8_t { Ok, Hold };

/// The checker must stay at least one instruction behind the main thread.
inline LagVerdict lag_guard_check(std::int64_t big_committed_seq, std::int64_t checker_next_seq) {
  return checker_next_seq >= big_committed_seq ? LagVerdict::Hold : LagVerdict::Ok;
}

struct Guards {
  bool lag = true;
  bool io_sync = true;
};

enum class ScenarioOp : std::uint8_t {
  SegmentOpen,
  BigLock,
  BigUnlock,
  BigTouch,
  BigWaitChecker,
  EvictPage,
  CheckerFetch,
  CheckerFinish,
};

struct ScenarioEvent {
  std::uint64_t cycle = 0;
  ScenarioOp op = ScenarioOp::SegmentOpen;
  std::vector<std::string> args;
  int line = 0;
};

struct Scenario {
  std::string name;
  std::vector<ScenarioEvent> events;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the `at <cycle> <event> <args>` DSL. `#` starts a comment.
Scenario parse_scenario(std::string_view text, std::string name = "scenario");

struct DeadlockVerdict {
  bool deadlock = false;
  std::uint64_t cycle = 0;
  /// Wait-for cycle such as "big -> checker -> lock:L -> big".
  std::string wait_for;
  /// Cycles during which the checker ran at or ahead of the main thread.
  std::uint64_t lag_violations = 0;
  std::string_view label() const { return deadlock ? "DeadlockDetected" : "Completed"; }
};

/// Pages, locks and the wait-for graph between the main thread and its
/// checker. Agents are "big" and "checker"; locks are named.
class PageLockModel {
 public:
  explicit PageLockModel(Guards guards) : guards_(guards) {}

  /// Applies one event; events of a blocked agent are queued until it
  /// resumes. Returns the wait-for cycle if one now exists.
  std::optional<std::string> apply(const ScenarioEvent& ev);

  bool blocked(std::string_view agent) const;
  bool finished() const { return checker_finished_; }
  std::uint64_t lag_violations() const { return lag_violations_; }
  std::optional<std::string> find_cycle() const;

 private:
  void run(const ScenarioEvent& ev);
  void run_big(const ScenarioEvent& ev);
  void run_checker(const ScenarioEvent& ev);
  void checker_fetch(std::uint64_t page, const std::string& lock);
  void fault_in(const std::string& agent, std::uint64_t page, const std::string& lock);
  void grant_lock(const std::string& lock);
  void drain();

  Guards guards_;
  std::map<std::uint64_t, bool> resident_;
  std::set<std::uint64_t> segment_pages_;
  std::set<std::uint64_t> touched_;
  std::map<std::string, std::string> holder_;
  /// agent -> lock it waits for
  std::map<std::string, std::string> waiting_lock_;
  /// Pending fetch of a checker blocked on a fault or the lag guard.
  std::optional<std::pair<std::uint64_t, std::string>> pending_fetch_;
  std::optional<std::uint64_t> lag_hold_page_;
  bool big_waits_checker_ = false;
  bool checker_finished_ = false;
  std::vector<ScenarioEvent> queued_big_;
  std::vector<ScenarioEvent> queued_checker_;
  std::uint64_t lag_violations_ = 0;
};

DeadlockVerdict run_scenario(const Scenario& scenario, Guards guards);

/// Text of the canonical scenario: a main thread holding a lock waits for
/// its checker while the checker faults on an evicted page and overtakes the
/// main thread into an untouched page.
std::string_view canonical_scenario_text();

DeadlockVerdict deadlock_scenario(Guards guards);

}  // namespace paracheck

#endif  // PARACHECK_OS_MODEL_HPP
