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
 * @file fabric.hpp
 * @brief Forwarding fabric between the big core's commit paths and the
 *        little cores' LSLs.
 *
 * Each commit path owns a dual-channel buffer (status and runtime FIFOs).
 * Every little-core cycle the fabric launches up to `packets_per_cycle`
 * packets, oldest order tag first, and delivers them after a fixed pipeline
 * delay. The interconnect is a crossbar with a global per-cycle budget, not a
 * hop-by-hop mesh.
 */

#ifndef PARACHECK_FABRIC_HPP
#define PARACHECK_FABRIC_HPP

#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "paracheck/big_core.hpp"

namespace paracheck {

enum class PacketKind : std::uint8_t { Status, Runtime };

struct OrderTag {
  std::uint64_t epoch = 0;
  std::uint64_t index = 0;
  auto operator<=>(const OrderTag&) const = default;
};

std::string to_string(const OrderTag& t);

struct Packet {
  PacketKind kind = PacketKind::Runtime;
  std::variant<StatusPacket, LogEntry> payload;
  /// Little-core ids; runtime packets have one, status packets one or two.
  std::vector<std::uint32_t> dests;
  OrderTag tag;

  std::uint32_t bytes() const;
  const StatusPacket& status() const { return std::get<StatusPacket>(payload); }
  const LogEntry& runtime() const { return std::get<LogEntry>(payload); }
  StatusPacket& status() { return std::get<StatusPacket>(payload); }
  LogEntry& runtime() { return std::get<LogEntry>(payload); }

  static Packet make_status(const StatusPacket& sp, std::vector<std::uint32_t> dests);
  static Packet make_runtime(const LogEntry& e, std::uint32_t dest);
};

enum class FabricVariant : std::uint8_t { HmNoc, Baseline };

struct FabricKind {
  FabricVariant variant = FabricVariant::HmNoc;
  std::uint32_t packets_per_cycle = 2;
  std::uint32_t payload_bits = 256;
  bool multicast = true;

  static FabricKind hmnoc() { return {FabricVariant::HmNoc, 2, 256, true}; }
  static FabricKind baseline() { return {FabricVariant::Baseline, 1, 128, false}; }
  /// Status words carried by one packet of this fabric.
  std::uint32_t words_per_packet() const { return payload_bits / 64; }
};

std::string_view fabric_name(FabricVariant v);
FabricKind parse_fabric_kind(std::string_view name);

class BoundedFifo {
 public:
  explicit BoundedFifo(std::size_t capacity) : capacity_(capacity) {}
  bool full() const { return items_.size() >= capacity_; }
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }
  std::size_t free() const { return capacity_ - items_.size(); }
  std::size_t capacity() const { return capacity_; }
  void push(Packet p) { items_.push_back(std::move(p)); }
  Packet pop();
  const Packet& front() const { return items_.front(); }
  const std::deque<Packet>& items() const { return items_; }

 private:
  std::size_t capacity_;
  std::deque<Packet> items_;
};

struct DcBuffer {
  explicit DcBuffer(std::size_t entries) : status(entries), runtime(entries) {}
  BoundedFifo status;
  BoundedFifo runtime;
  BoundedFifo& channel(PacketKind k) { return k == PacketKind::Status ? status : runtime; }
  const BoundedFifo& channel(PacketKind k) const {
    return k == PacketKind::Status ? status : runtime;
  }
};

enum class EnqueueResult : std::uint8_t { Accepted, Rejected };

struct Delivery {
  std::uint32_t dest = 0;
  Packet packet;
};

class OrderViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-destination delivery order: tags must be non-decreasing.
bool per_destination_order_check(std::span<const OrderTag> history);

/// Incremental form used at run time; throws OrderViolation.
class OrderMonitor {
 public:
  void observe(std::uint32_t dest, const OrderTag& tag);

 private:
  std::map<std::uint32_t, OrderTag> last_;
};

class Fabric {
 public:
  Fabric(FabricKind kind, std::uint32_t paths, std::size_t entries_per_channel,
         std::uint32_t pipeline_delay = 2);

  /// Tags of packets enqueued from now on start at (epoch, 0).
  void set_epoch(std::uint64_t epoch);

  /// Appends to the channel matching the packet kind. On a fabric without
  /// multicast a two-destination status packet is split into unicast copies,
  /// which needs one free slot per copy.
  EnqueueResult enqueue(std::uint32_t path, Packet packet);

  bool can_accept(std::uint32_t path, PacketKind kind, std::size_t n = 1) const;
  std::size_t slots_needed(const Packet& p) const;
  /// Bit k set when path k's runtime FIFO has a free slot.
  std::uint32_t runtime_free_mask() const;

  /// One little-core cycle. `lsl_free` is indexed by little-core id; a
  /// packet launches only when every destination has room for it after the
  /// bytes already in transit. Returns packets arriving this cycle.
  std::vector<Delivery> cycle(std::span<const std::uint64_t> lsl_free);

  std::uint64_t in_transit_bytes(std::uint32_t dest) const;
  std::size_t buffered() const;
  std::size_t in_flight() const { return buffered() + pipeline_.size(); }
  std::uint64_t accepted() const { return accepted_; }
  std::uint64_t delivered() const { return delivered_; }
  std::uint64_t cycles() const { return now_; }
  const FabricKind& kind() const { return kind_; }
  std::uint32_t paths() const { return static_cast<std::uint32_t>(buffers_.size()); }
  const DcBuffer& buffer(std::uint32_t path) const { return buffers_.at(path); }

 private:
  struct InFlight {
    std::uint64_t due = 0;
    Packet packet;
  };

  FabricKind kind_;
  std::vector<DcBuffer> buffers_;
  std::uint32_t delay_;
  std::deque<InFlight> pipeline_;
  std::map<std::uint32_t, std::uint64_t> transit_bytes_;
  OrderMonitor monitor_;
  std::uint64_t epoch_ = 0;
  std::uint64_t index_ = 0;
  std::uint64_t now_ = 0;
  std::uint64_t accepted_ = 0;
  std::uint64_t delivered_ = 0;
};

}  // namespace paracheck

#endif  // PARACHECK_FABRIC_HPP
