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

#include <charconv>
#include <cmath>
#include <functional>

#include "paracheck/sim.hpp"
#include "paracheck/util.hpp"

namespace paracheck {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + std::string(key) + "': expected an unsigned integer, got '" +
                      std::string(v) + "'");
  }
  return out;
}

std::uint32_t to_u32(std::string_view key, std::string_view v) {
  const std::uint64_t x = to_u64(key, v);
  if (x > 0xFFFFFFFFULL) throw ConfigError("config key '" + std::string(key) + "' out of range");
  return static_cast<std::uint32_t>(x);
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError("config key '" + std::string(key) + "': expected a number, got '" +
                      std::string(v) + "'");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (iequals(v, "true") || iequals(v, "on") || v == "1" || iequals(v, "yes")) return true;
  if (iequals(v, "false") || iequals(v, "off") || v == "0" || iequals(v, "no")) return false;
  throw ConfigError("config key '" + std::string(key) + "': expected a boolean, got '" +
                    std::string(v) + "'");
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

struct Key {
  std::string name;
  std::function<void(SimConfig&, std::string_view)> set;
  std::function<std::string(const SimConfig&)> get;
};

template <typename T, typename Conv>
Key int_key(std::string name, T SimConfig::*field, Conv conv) {
  return {name,
          [name, field, conv](SimConfig& c, std::string_view v) { c.*field = conv(name, v); },
          [field](const SimConfig& c) { return std::to_string(c.*field); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = [] {
    std::vector<Key> v;
    v.push_back(int_key("commit_width", &SimConfig::commit_width, to_u32));
    v.push_back(int_key("n_littles", &SimConfig::n_littles, to_u32));
    v.push_back(int_key("lsl_capacity_bytes", &SimConfig::lsl_capacity_bytes, to_u64));
    v.push_back(int_key("timeout_instructions", &SimConfig::timeout_instructions, to_u64));
    v.push_back({"fabric",
                 [](SimConfig& c, std::string_view s) {
                   try {
                     c.fabric = parse_fabric_kind(s);
                   } catch (const std::invalid_argument& e) {
                     throw ConfigError(e.what());
                   }
                 },
                 [](const SimConfig& c) { return std::string(fabric_name(c.fabric.variant)); }});
    v.push_back(int_key("dc_buffer_entries", &SimConfig::dc_buffer_entries, to_u32));
    v.push_back(int_key("clock_ratio", &SimConfig::clock_ratio, to_u32));
    v.push_back({"big_clock_ghz",
                 [](SimConfig& c, std::string_view s) { c.big_clock_ghz = to_double("big_clock_ghz", s); },
                 [](const SimConfig& c) { return fmt_double(c.big_clock_ghz); }});
    v.push_back({"div_unroll",
                 [](SimConfig& c, std::string_view s) { c.little.div_unroll = to_u32("div_unroll", s); },
                 [](const SimConfig& c) { return std::to_string(c.little.div_unroll); }});
    v.push_back({"fpu_latency",
                 [](SimConfig& c, std::string_view s) { c.little.fpu_latency = to_u32("fpu_latency", s); },
                 [](const SimConfig& c) { return std::to_string(c.little.fpu_latency); }});
    for (std::size_t i = 0; i < kNumClasses; ++i) {
      const auto cls = static_cast<InstrClass>(i);
      const std::string name = "cost." + std::string(class_name(cls));
      v.push_back({name,
                   [name, i](SimConfig& c, std::string_view s) {
                     try {
                       c.costs.units[i] = CommitCosts::to_units(to_double(name, s));
                     } catch (const std::invalid_argument& e) {
                       throw ConfigError("config key '" + name + "': " + e.what());
                     }
                   },
                   [cls](const SimConfig& c) { return fmt_double(c.costs.cycles(cls)); }});
    }
    v.push_back(int_key("regs_per_packet", &SimConfig::regs_per_packet, to_u32));
    v.push_back(int_key("prf_read_ports", &SimConfig::prf_read_ports, to_u32));
    v.push_back(int_key("forwarded_csr_count", &SimConfig::forwarded_csr_count, to_u32));
    v.push_back(int_key("seed", &SimConfig::seed, to_u64));
    v.push_back({"lag_guard",
                 [](SimConfig& c, std::string_view s) { c.guards.lag = to_bool("lag_guard", s); },
                 [](const SimConfig& c) { return bool_str(c.guards.lag); }});
    v.push_back({"io_sync_guard",
                 [](SimConfig& c, std::string_view s) { c.guards.io_sync = to_bool("io_sync_guard", s); },
                 [](const SimConfig& c) { return bool_str(c.guards.io_sync); }});
    auto area = [&](std::string name, double AreaTable::*field) {
      v.push_back({name,
                   [name, field](SimConfig& c, std::string_view s) { c.area.*field = to_double(name, s); },
                   [field](const SimConfig& c) { return fmt_double(c.area.*field); }});
    };
    area("area.rocket_mm2", &AreaTable::rocket_mm2);
    area("area.wrapper_mm2", &AreaTable::wrapper_mm2);
    area("area.boom_mm2", &AreaTable::boom_mm2);
    area("area.fabric_mm2", &AreaTable::fabric_mm2);
    v.push_back(int_key("fabric_delay", &SimConfig::fabric_delay, to_u32));
    v.push_back(int_key("kernel_cycles", &SimConfig::kernel_cycles, to_u64));
    v.push_back({"count_drain",
                 [](SimConfig& c, std::string_view s) { c.count_drain = to_bool("count_drain", s); },
                 [](const SimConfig& c) { return bool_str(c.count_drain); }});
    v.push_back(int_key("cycle_cap", &SimConfig::cycle_cap, to_u64));
    v.push_back(int_key("memory_bytes", &SimConfig::memory_bytes, to_u64));
    v.push_back(int_key("max_instrs", &SimConfig::max_instrs, to_u64));
    return v;
  }();
  return k;
}

}  // namespace

void SimConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (commit_width == 0 || commit_width > 32) fail("commit_width must be in 1..32");
  if (n_littles == 0 || n_littles > 1024) fail("n_littles must be in 1..1024");
  if (lsl_capacity_bytes == 0) fail("lsl_capacity_bytes must be > 0");
  if (timeout_instructions == 0) fail("timeout_instructions must be > 0");
  if (dc_buffer_entries == 0) fail("dc_buffer_entries must be > 0");
  if (!fabric.multicast && dc_buffer_entries < 2) {
    fail("dc_buffer_entries must be >= 2 on a fabric without multicast");
  }
  if (clock_ratio == 0) fail("clock_ratio must be >= 1");
  if (!(big_clock_ghz > 0.0)) fail("big_clock_ghz must be > 0");
  try {
    little.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (regs_per_packet == 0 || regs_per_packet > kMaxWordsPerPacket) {
    fail("regs_per_packet must be in 1..8");
  }
  if (prf_read_ports == 0) fail("prf_read_ports must be > 0");
  if (forwarded_csr_count > kForwardableCsrs.size()) fail("forwarded_csr_count must be <= 4");
  for (std::uint32_t u : costs.units) {
    if (u == 0) fail("commit costs must be positive");
  }
  if (max_instrs == 0 || cycle_cap == 0) fail("max_instrs and cycle_cap must be > 0");
  const std::uint64_t status = 2ULL * status_bytes(forwarded_csr_count, words_per_packet());
  if (lsl_capacity_bytes < status + commit_width * kLogEntryBytes) {
    fail("lsl_capacity_bytes too small: two checkpoints need " + std::to_string(status) +
         " bytes plus one commit bundle of log entries");
  }
}

std::uint32_t SimConfig::words_per_packet() const {
  return std::max<std::uint32_t>(1, std::min(regs_per_packet, fabric.words_per_packet()));
}

std::uint32_t SimConfig::status_packets() const {
  return status_packet_count(status_word_count(forwarded_csr_count), words_per_packet());
}

std::uint64_t SimConfig::segment_log_budget() const {
  const std::uint64_t status = 2ULL * status_bytes(forwarded_csr_count, words_per_packet());
  return lsl_capacity_bytes > status ? lsl_capacity_bytes - status : 0;
}

void apply_override(SimConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  for (const Key& k : keys()) {
    if (k.name == key) {
      k.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void apply_override(SimConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  }
  apply_override(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

SimConfig parse_config(std::string_view text, SimConfig base) {
  int line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      apply_override(base, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

std::vector<std::pair<std::string, std::string>> config_entries(const SimConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Key& k : keys()) out.emplace_back(k.name, k.get(cfg));
  return out;
}

std::string format_config(const SimConfig& cfg) {
  std::string s;
  for (const auto& [k, v] : config_entries(cfg)) s += k + " = " + v + "\n";
  return s;
}

}  // namespace paracheck
