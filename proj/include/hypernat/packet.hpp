#pragma once

#include <array>
#include <cstdint>

#include "hypernat/endpoint.hpp"
#include "hypernat/time.hpp"

namespace hypernat {

enum class Direction : uint8_t { Outgoing, Incoming };

enum class PacketState : uint8_t { InFlight, Returned, Dropped };

// Named per-packet milestones, stamped as the packet moves through the
// fabric. A full round trip touches all eight.
enum class PacketEvent : uint8_t {
  Sent = 0,
  ArriveNicOut,
  RuleReadyOut,
  ArriveReceiver,
  EchoSent,
  ArriveNicIn,
  RuleReadyIn,
  Returned,
  Count
};

struct Packet {
  uint64_t seq = 0;      // emission order, unique per run
  uint64_t flow_id = 0;  // 1-based, first-appearance order in the trace
  FiveTuple tuple;       // current header; rewritten by translation
  Direction dir = Direction::Outgoing;
  uint32_t size_bytes = 0;
  PacketState state = PacketState::InFlight;
  std::array<Nanos, static_cast<size_t>(PacketEvent::Count)> ts;

  Packet() { ts.fill(-1); }

  Nanos stamp(PacketEvent e, Nanos t) {
    ts[static_cast<size_t>(e)] = t;
    return t;
  }
  Nanos at(PacketEvent e) const { return ts[static_cast<size_t>(e)]; }
};

}  // namespace hypernat
