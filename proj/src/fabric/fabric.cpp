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

#include "paracheck/fabric.hpp"

#include <optional>

#include "paracheck/util.hpp"

namespace paracheck {

std::string to_string(const OrderTag& t) {
  return "(" + std::to_string(t.epoch) + "," + std::to_string(t.index) + ")";
}

std::uint32_t Packet::bytes() const {
  return kind == PacketKind::Status ? status().wire_bytes() : kLogEntryBytes;
}

Packet Packet::make_status(const StatusPacket& sp, std::vector<std::uint32_t> dests) {
  if (dests.empty() || dests.size() > 2) {
    throw std::invalid_argument("status packets need one or two destinations");
  }
  Packet p;
  p.kind = PacketKind::Status;
  p.payload = sp;
  p.dests = std::move(dests);
  return p;
}

Packet Packet::make_runtime(const LogEntry& e, std::uint32_t dest) {
  Packet p;
  p.kind = PacketKind::Runtime;
  p.payload = e;
  p.dests = {dest};
  return p;
}

std::string_view fabric_name(FabricVariant v) {
  return v == FabricVariant::HmNoc ? "hmnoc" : "baseline";
}

FabricKind parse_fabric_kind(std::string_view name) {
  if (iequals(name, "hmnoc")) return FabricKind::hmnoc();
  if (iequals(name, "baseline")) return FabricKind::baseline();
  throw std::invalid_argument("unknown fabric '" + std::string(name) +
                              "' (expected hmnoc or baseline)");
}

Packet BoundedFifo::pop() {
  Packet p = std::move(items_.front());
  items_.pop_front();
  return p;
}

bool per_destination_order_check(std::span<const OrderTag> history) {
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i] < history[i - 1]) return false;
  }
  return true;
}

void OrderMonitor::observe(std::uint32_t dest, const OrderTag& tag) {
  auto [it, inserted] = last_.try_emplace(dest, tag);
  if (inserted) return;
  if (tag < it->second) {
    throw OrderViolation("destination " + std::to_string(dest) + " received " + to_string(tag) +
                         " after " + to_string(it->second));
  }
  it->second = tag;
}

Fabric::Fabric(FabricKind kind, std::uint32_t paths, std::size_t entries_per_channel,
               std::uint32_t pipeline_delay)
    : kind_(kind), delay_(pipeline_delay) {
  if (paths == 0 || paths > 32) throw std::invalid_argument("fabric needs 1..32 paths");
  if (entries_per_channel == 0) throw std::invalid_argument("dc buffer entries must be > 0");
  if (kind_.packets_per_cycle == 0) throw std::invalid_argument("packets_per_cycle must be > 0");
  buffers_.reserve(paths);
  for (std::uint32_t i = 0; i < paths; ++i) buffers_.emplace_back(entries_per_channel);
}

void Fabric::set_epoch(std::uint64_t epoch) {
  if (epoch < epoch_) throw std::logic_error("fabric epoch must not decrease");
  if (epoch != epoch_) {
    epoch_ = epoch;
    index_ = 0;
  }
}

std::size_t Fabric::slots_needed(const Packet& p) const {
  return kind_.multicast ? 1 : p.dests.size();
}

bool Fabric::can_accept(std::uint32_t path, PacketKind kind, std::size_t n) const {
  return buffers_.at(path).channel(kind).free() >= n;
}

std::uint32_t Fabric::runtime_free_mask() const {
  std::uint32_t mask = 0;
  for (std::size_t i = 0; i < buffers_.size(); ++i) {
    if (!buffers_[i].runtime.full()) mask |= 1u << i;
  }
  return mask;
}

EnqueueResult Fabric::enqueue(std::uint32_t path, Packet packet) {
  if (path >= buffers_.size()) throw std::out_of_range("commit path out of range");
  if (packet.dests.empty()) throw std::invalid_argument("packet without destination");
  BoundedFifo& fifo = buffers_[path].channel(packet.kind);
  if (fifo.free() < slots_needed(packet)) return EnqueueResult::Rejected;
  if (kind_.multicast || packet.dests.size() == 1) {
    packet.tag = {epoch_, index_++};
    fifo.push(std::move(packet));
    ++accepted_;
  } else {
    for (std::uint32_t d : packet.dests) {
      Packet copy = packet;
      copy.dests = {d};
      copy.tag = {epoch_, index_++};
      fifo.push(std::move(copy));
      ++accepted_;
    }
  }
  return EnqueueResult::Accepted;
}

std::uint64_t Fabric::in_transit_bytes(std::uint32_t dest) const {
  auto it = transit_bytes_.find(dest);
  return it == transit_bytes_.end() ? 0 : it->second;
}

std::size_t Fabric::buffered() const {
  std::size_t n = 0;
  for (const auto& b : buffers_) n += b.status.size() + b.runtime.size();
  return n;
}

std::vector<Delivery> Fabric::cycle(std::span<const std::uint64_t> lsl_free) {
  const std::size_t nfifo = buffers_.size() * 2;
  auto fifo_at = [&](std::size_t i) -> BoundedFifo& {
    return i % 2 == 0 ? buffers_[i / 2].status : buffers_[i / 2].runtime;
  };
  std::vector<bool> stuck(nfifo, false);
  // Oldest tag of a packet that cannot move toward each destination this
  // cycle; younger packets to that destination must wait behind it.
  std::map<std::uint32_t, OrderTag> blocked_from;

  auto can_launch = [&](const Packet& p) {
    const std::uint32_t bytes = p.bytes();
    for (std::uint32_t d : p.dests) {
      if (d >= lsl_free.size()) throw std::out_of_range("packet destination has no LSL");
      auto b = blocked_from.find(d);
      if (b != blocked_from.end() && b->second < p.tag) return false;
      if (lsl_free[d] < in_transit_bytes(d) + bytes) return false;
    }
    return true;
  };

  std::uint32_t budget = kind_.packets_per_cycle;
  while (budget > 0) {
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < nfifo; ++i) {
      if (stuck[i] || fifo_at(i).empty()) continue;
      // Ties cannot happen (tags are unique), so scanning in path order
      // already prefers the lowest path id.
      if (!pick || fifo_at(i).front().tag < fifo_at(*pick).front().tag) pick = i;
    }
    if (!pick) break;
    BoundedFifo& fifo = fifo_at(*pick);
    if (can_launch(fifo.front())) {
      Packet p = fifo.pop();
      for (std::uint32_t d : p.dests) transit_bytes_[d] += p.bytes();
      pipeline_.push_back({now_ + delay_, std::move(p)});
      --budget;
    } else {
      stuck[*pick] = true;
      for (const Packet& p : fifo.items()) {
        for (std::uint32_t d : p.dests) {
          auto [it, inserted] = blocked_from.try_emplace(d, p.tag);
          if (!inserted && p.tag < it->second) it->second = p.tag;
        }
      }
    }
  }

  std::vector<Delivery> out;
  while (!pipeline_.empty() && pipeline_.front().due <= now_) {
    Packet p = std::move(pipeline_.front().packet);
    pipeline_.pop_front();
    ++delivered_;
    for (std::uint32_t d : p.dests) {
      transit_bytes_[d] -= p.bytes();
      monitor_.observe(d, p.tag);
      out.push_back({d, p});
    }
  }
  ++now_;
  return out;
}

}  // namespace paracheck
