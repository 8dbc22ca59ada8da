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

#include "paracheck/os_model.hpp"

#include <algorithm>
#include <charconv>

#include "paracheck/util.hpp"

namespace paracheck {

void HookTable::hook(std::uint32_t big_id, const std::vector<std::uint32_t>& little_ids) {
  std::set<std::uint32_t> seen;
  for (std::uint32_t l : little_ids) {
    if (is_hooked(l)) {
      throw HookError("little core " + std::to_string(l) + " is already hooked to big core " +
                      std::to_string(owner_.at(l)));
    }
    if (!seen.insert(l).second) {
      throw HookError("little core " + std::to_string(l) + " listed twice");
    }
  }
  auto& list = hooks_[big_id];
  for (std::uint32_t l : little_ids) {
    list.push_back(l);
    owner_[l] = big_id;
    free_[l] = true;
  }
}

std::optional<std::uint32_t> HookTable::owner_of(std::uint32_t little_id) const {
  auto it = owner_.find(little_id);
  if (it == owner_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::uint32_t>& HookTable::littles_of(std::uint32_t big_id) const {
  static const std::vector<std::uint32_t> kNone;
  auto it = hooks_.find(big_id);
  return it == hooks_.end() ? kNone : it->second;
}

std::size_t HookTable::available(std::uint32_t big_id) const {
  const auto& l = littles_of(big_id);
  return static_cast<std::size_t>(
      std::count_if(l.begin(), l.end(), [&](std::uint32_t id) { return is_free(id); }));
}

bool HookTable::is_free(std::uint32_t little_id) const {
  auto it = free_.find(little_id);
  return it != free_.end() && it->second;
}

void HookTable::set_free(std::uint32_t little_id, bool free) {
  if (!is_hooked(little_id)) {
    throw HookError("little core " + std::to_string(little_id) + " is not hooked");
  }
  free_[little_id] = free;
}

std::optional<std::uint32_t> HookTable::dispatch_segment(std::uint32_t big_id) {
  const auto& list = littles_of(big_id);
  if (list.empty()) return std::nullopt;
  std::size_t& rr = rr_[big_id];
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::size_t i = (rr + k) % list.size();
    if (is_free(list[i])) {
      free_[list[i]] = false;
      rr = (i + 1) % list.size();
      return list[i];
    }
  }
  return std::nullopt;
}

CheckerThread& CheckerRegistry::spawn(std::uint32_t little, std::uint64_t segment) {
  CheckerThread t;
  t.tid = next_tid_++;
  t.assigned_little = little;
  t.state = CheckerState::WaitingSrcp;
  t.segment = segment;
  auto [it, inserted] = active_.insert_or_assign(little, t);
  return it->second;
}

CheckerThread& CheckerRegistry::on(std::uint32_t little) {
  auto it = active_.find(little);
  if (it == active_.end()) {
    throw std::logic_error("no checker thread on little core " + std::to_string(little));
  }
  return it->second;
}

const CheckerThread* CheckerRegistry::find(std::uint32_t little) const {
  auto it = active_.find(little);
  return it == active_.end() ? nullptr : &it->second;
}

void CheckerRegistry::finish(std::uint32_t little) {
  CheckerThread& t = on(little);
  t.state = CheckerState::Done;
  t.segment.reset();
}

std::vector<ConfigEffect> context_switch_big(HookTable& hooks, std::uint32_t big_id,
                                             const Task& /*current*/, const Task& next) {
  std::vector<ConfigEffect> fx;
  fx.push_back({ConfigEffect::Kind::CheckDisable, big_id, 0});
  if (next.newly_released) {
    for (std::uint32_t l : next.checker_index) {
      hooks.hook(big_id, {l});
      fx.push_back({ConfigEffect::Kind::Hook, big_id, l});
    }
  }
  fx.push_back({ConfigEffect::Kind::CheckEnable, big_id, 0});
  return fx;
}

std::vector<CoreMode> context_switch_little(const Task& /*current*/, const Task& next) {
  std::vector<CoreMode> modes{CoreMode::Application};
  if (next.is_checker) modes.push_back(CoreMode::Check);
  return modes;
}

void PinTable::unpin(std::uint32_t tid) {
  pinned_.erase(tid);
  std::erase(deferred_, tid);
}

MigrationVerdict PinTable::request_migration(std::uint32_t tid) {
  if (!pinned(tid)) return MigrationVerdict::Granted;
  if (std::find(deferred_.begin(), deferred_.end(), tid) == deferred_.end()) {
    deferred_.push_back(tid);
  }
  return MigrationVerdict::Deferred;
}

namespace {

struct OpInfo {
  std::string_view name;
  ScenarioOp op;
  int min_args;
  int max_args;
};

constexpr OpInfo kOps[] = {
    {"segment_open", ScenarioOp::SegmentOpen, 1, 64},
    {"big_lock", ScenarioOp::BigLock, 1, 1},
    {"big_unlock", ScenarioOp::BigUnlock, 1, 1},
    {"big_touch", ScenarioOp::BigTouch, 1, 1},
    {"big_wait_checker", ScenarioOp::BigWaitChecker, 0, 0},
    {"evict_page", ScenarioOp::EvictPage, 1, 1},
    {"checker_fetch", ScenarioOp::CheckerFetch, 2, 2},
    {"checker_finish", ScenarioOp::CheckerFinish, 0, 0},
};

bool is_big_op(ScenarioOp op) {
  switch (op) {
    case ScenarioOp::SegmentOpen:
    case ScenarioOp::BigLock:
    case ScenarioOp::BigUnlock:
    case ScenarioOp::BigTouch:
    case ScenarioOp::BigWaitChecker: return true;
    default: return false;
  }
}

std::uint64_t parse_u64(std::string_view s, int line, std::string_view what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ScenarioError("line " + std::to_string(line) + ": bad " + std::string(what) + " '" +
                        std::string(s) + "'");
  }
  return v;
}

std::uint64_t page_arg(const ScenarioEvent& ev, std::size_t i) {
  return parse_u64(ev.args.at(i), ev.line, "page");
}

}  // namespace

Scenario parse_scenario(std::string_view text, std::string name) {
  Scenario sc;
  sc.name = std::move(name);
  int line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::vector<std::string_view> tok;
    for (std::string_view t : split(trim(raw), ' ')) {
      t = trim(t);
      if (!t.empty()) tok.push_back(t);
    }
    if (tok.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (tok[0] != "at" || tok.size() < 3) {
      throw ScenarioError(where + "expected 'at <cycle> <event> <args>'");
    }
    ScenarioEvent ev;
    ev.line = line_no;
    ev.cycle = parse_u64(tok[1], line_no, "cycle");
    const OpInfo* info = nullptr;
    for (const auto& o : kOps) {
      if (o.name == tok[2]) info = &o;
    }
    if (!info) throw ScenarioError(where + "unknown event '" + std::string(tok[2]) + "'");
    ev.op = info->op;
    for (std::size_t i = 3; i < tok.size(); ++i) ev.args.emplace_back(tok[i]);
    const int n = static_cast<int>(ev.args.size());
    if (n < info->min_args || n > info->max_args) {
      throw ScenarioError(where + std::string(info->name) + " takes " +
                          std::to_string(info->min_args) +
                          (info->max_args != info->min_args ? "+" : "") + " argument(s)");
    }
    if (ev.op == ScenarioOp::SegmentOpen || ev.op == ScenarioOp::BigTouch ||
        ev.op == ScenarioOp::EvictPage || ev.op == ScenarioOp::CheckerFetch) {
      const std::size_t pages = ev.op == ScenarioOp::SegmentOpen ? ev.args.size() : 1;
      for (std::size_t i = 0; i < pages; ++i) page_arg(ev, i);
    }
    sc.events.push_back(std::move(ev));
  }
  std::stable_sort(sc.events.begin(), sc.events.end(),
                   [](const ScenarioEvent& a, const ScenarioEvent& b) { return a.cycle < b.cycle; });
  return sc;
}

bool PageLockModel::blocked(std::string_view agent) const {
  if (waiting_lock_.count(std::string(agent))) return true;
  if (agent == "big") return big_waits_checker_;
  if (agent == "checker") return lag_hold_page_.has_value();
  return false;
}

std::optional<std::string> PageLockModel::apply(const ScenarioEvent& ev) {
  if (ev.op == ScenarioOp::EvictPage) {
    run(ev);
  } else if (is_big_op(ev.op)) {
    if (blocked("big") || !queued_big_.empty()) {
      queued_big_.push_back(ev);
    } else {
      run_big(ev);
    }
  } else {
    if (blocked("checker") || !queued_checker_.empty()) {
      queued_checker_.push_back(ev);
    } else {
      run_checker(ev);
    }
  }
  drain();
  return find_cycle();
}

void PageLockModel::drain() {
  bool progress = true;
  while (progress) {
    progress = false;
    if (!blocked("big") && !queued_big_.empty()) {
      ScenarioEvent ev = queued_big_.front();
      queued_big_.erase(queued_big_.begin());
      run_big(ev);
      progress = true;
    }
    if (!blocked("checker") && !queued_checker_.empty()) {
      ScenarioEvent ev = queued_checker_.front();
      queued_checker_.erase(queued_checker_.begin());
      run_checker(ev);
      progress = true;
    }
  }
}

void PageLockModel::run(const ScenarioEvent& ev) {
  // Only eviction is issued by the OS itself.
  const std::uint64_t page = page_arg(ev, 0);
  if (guards_.io_sync && segment_pages_.count(page)) return;  // pinned until the segment ends
  resident_[page] = false;
}

void PageLockModel::run_big(const ScenarioEvent& ev) {
  const std::string where = "line " + std::to_string(ev.line) + ": ";
  switch (ev.op) {
    case ScenarioOp::SegmentOpen:
      segment_pages_.clear();
      touched_.clear();
      for (std::size_t i = 0; i < ev.args.size(); ++i) {
        const std::uint64_t p = page_arg(ev, i);
        segment_pages_.insert(p);
        resident_[p] = true;
      }
      checker_finished_ = false;
      break;
    case ScenarioOp::BigLock: {
      const std::string& lock = ev.args[0];
      auto it = holder_.find(lock);
      if (it == holder_.end()) {
        holder_[lock] = "big";
      } else if (it->second == "big") {
        throw ScenarioError(where + "big already holds " + lock);
      } else {
        waiting_lock_["big"] = lock;
      }
      break;
    }
    case ScenarioOp::BigUnlock: {
      const std::string& lock = ev.args[0];
      auto it = holder_.find(lock);
      if (it == holder_.end() || it->second != "big") {
        throw ScenarioError(where + "big does not hold " + lock);
      }
      holder_.erase(it);
      grant_lock(lock);
      break;
    }
    case ScenarioOp::BigTouch: {
      const std::uint64_t p = page_arg(ev, 0);
      touched_.insert(p);
      resident_[p] = true;
      if (lag_hold_page_ == p) {
        lag_hold_page_.reset();
        auto f = *pending_fetch_;
        pending_fetch_.reset();
        checker_fetch(f.first, f.second);
      }
      break;
    }
    case ScenarioOp::BigWaitChecker:
      touched_.insert(segment_pages_.begin(), segment_pages_.end());
      for (std::uint64_t p : segment_pages_) {
        if (!resident_[p] && !(pending_fetch_ && pending_fetch_->first == p)) resident_[p] = true;
      }
      if (lag_hold_page_) {
        lag_hold_page_.reset();
        auto f = *pending_fetch_;
        pending_fetch_.reset();
        checker_fetch(f.first, f.second);
      }
      if (!checker_finished_) big_waits_checker_ = true;
      break;
    default: throw std::logic_error("not a main-thread event");
  }
}

void PageLockModel::run_checker(const ScenarioEvent& ev) {
  switch (ev.op) {
    case ScenarioOp::CheckerFetch: checker_fetch(page_arg(ev, 0), ev.args[1]); break;
    case ScenarioOp::CheckerFinish:
      checker_finished_ = true;
      segment_pages_.clear();
      big_waits_checker_ = false;
      break;
    default: throw std::logic_error("not a checker event");
  }
}

void PageLockModel::checker_fetch(std::uint64_t page, const std::string& lock) {
  if (!touched_.count(page)) {
    if (guards_.lag) {
      lag_hold_page_ = page;
      pending_fetch_ = {page, lock};
      return;
    }
    // Overtook the main thread: the page has not been faulted in for it yet.
    ++lag_violations_;
    fault_in("checker", page, lock);
    return;
  }
  auto it = resident_.find(page);
  if (it == resident_.end() || !it->second) fault_in("checker", page, lock);
}

void PageLockModel::fault_in(const std::string& agent, std::uint64_t page,
                             const std::string& lock) {
  auto it = holder_.find(lock);
  if (it == holder_.end() || it->second == agent) {
    resident_[page] = true;
    return;
  }
  waiting_lock_[agent] = lock;
  if (agent == "checker") pending_fetch_ = {page, lock};
}

void PageLockModel::grant_lock(const std::string& lock) {
  for (auto it = waiting_lock_.begin(); it != waiting_lock_.end(); ++it) {
    if (it->second != lock) continue;
    const std::string agent = it->first;
    waiting_lock_.erase(it);
    if (agent == "checker" && pending_fetch_) {
      // Fault handler runs with the lock and drops it again.
      resident_[pending_fetch_->first] = true;
      pending_fetch_.reset();
    } else {
      holder_[lock] = agent;
    }
    return;
  }
}

std::optional<std::string> PageLockModel::find_cycle() const {
  auto next = [&](const std::string& node) -> std::optional<std::string> {
    if (node.rfind("lock:", 0) == 0) {
      auto it = holder_.find(node.substr(5));
      if (it == holder_.end()) return std::nullopt;
      return it->second;
    }
    if (auto it = waiting_lock_.find(node); it != waiting_lock_.end()) return "lock:" + it->second;
    if (node == "big" && big_waits_checker_) return std::string("checker");
    if (node == "checker" && lag_hold_page_) return std::string("big");
    return std::nullopt;
  };
  for (const std::string start : {"big", "checker"}) {
    std::vector<std::string> path{start};
    for (int step = 0; step < 16; ++step) {
      auto n = next(path.back());
      if (!n) break;
      auto hit = std::find(path.begin(), path.end(), *n);
      if (hit != path.end()) {
        std::string out;
        for (auto p = hit; p != path.end(); ++p) out += *p + " -> ";
        return out + *n;
      }
      path.push_back(*n);
    }
  }
  return std::nullopt;
}

DeadlockVerdict run_scenario(const Scenario& scenario, Guards guards) {
  PageLockModel model(guards);
  DeadlockVerdict v;
  for (const ScenarioEvent& ev : scenario.events) {
    if (auto cyc = model.apply(ev)) {
      v.deadlock = true;
      v.cycle = ev.cycle;
      v.wait_for = *cyc;
      v.lag_violations = model.lag_violations();
      return v;
    }
  }
  if (model.blocked("big") || model.blocked("checker") || !model.finished()) {
    throw ScenarioError("scenario '" + scenario.name +
                        "' ends with an unfinished checker or a blocked agent");
  }
  v.lag_violations = model.lag_violations();
  return v;
}

std::string_view canonical_scenario_text() {
  return "# main thread holds L while waiting; checker needs L to fault pages in\n"
         "at 0 segment_open 1 2\n"
         "at 1 big_touch 1\n"
         "at 2 big_lock L\n"
         "at 3 evict_page 1\n"
         "at 4 checker_fetch 1 L\n"
         "at 5 checker_fetch 2 L\n"
         "at 6 big_wait_checker\n"
         "at 7 big_unlock L\n"
         "at 8 checker_finish\n";
}

DeadlockVerdict deadlock_scenario(Guards guards) {
  return run_scenario(parse_scenario(canonical_scenario_text(), "canonical"), guards);
}

}  // namespace paracheck
