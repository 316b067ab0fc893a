#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "hypernat/addrspace.hpp"
#include "hypernat/hashing.hpp"
#include "hypernat/packet.hpp"
#include "hypernat/rules.hpp"

namespace hypernat {

enum class InstallMode : uint8_t { Passive, Active };

// Per-NIC data-plane counters surfaced in the run report.
struct NicCounters {
  uint64_t rule_creates = 0;
  uint64_t fetch_requests = 0;
  uint64_t fetch_replies = 0;
  uint64_t fetch_misses = 0;
  uint64_t installs_received = 0;
  uint64_t translated_out = 0;
  uint64_t translated_in = 0;
  uint64_t drops_exhausted = 0;
  uint64_t drops_unknown = 0;
  uint64_t drops_qfull = 0;
};

// Outcome of presenting an outgoing (internal -> remote) packet.
struct OutgoingResult {
  enum class Kind { Hit, Created, DropExhausted } kind = Kind::Hit;
  NatRule rule;                      // valid unless DropExhausted
  std::optional<RuleMessage> push;   // Active mode clone toward NIC j
};

// Outcome of presenting an incoming (remote -> external) packet.
struct IncomingResult {
  enum class Kind {
    Hit,           // rule present, translate now
    FetchIssued,   // first miss for this key: packet parked, request emitted
    FetchPending,  // later miss for a key already being fetched: parked
    DropActiveMiss // Active mode promised a pushed rule; none arrived
  } kind = Kind::Hit;
  NatRule rule;                      // valid for Hit
  std::optional<RuleMessage> fetch;  // valid for FetchIssued
};

// Outcome of a delivered rule message.
struct MessageResult {
  RuleMsgKind kind = RuleMsgKind::Install;
  bool installed_new = false;
  NatRule rule;                       // installed / looked-up rule
  std::optional<RuleMessage> reply;   // FetchReply or FetchMiss for requests
  std::vector<uint64_t> flushed;      // parked packet seqs, arrival order
  uint64_t dropped_pending = 0;       // parked packets discarded on FetchMiss
};

// Protocol state of one emulated smartNIC: rule table, its slice of the
// external space, and the passive-fetch bookkeeping. Time-free; the
// simulation engine layers service and propagation delays on top.
class NicState {
 public:
  NicState() = default;
  NicState(uint32_t id, const SubspacePlan& plan, InstallMode mode, HashConfig hash)
      : id_(id), alloc_(plan, id), mode_(mode), hash_(hash) {}

  uint32_t id() const { return id_; }
  const NatTable& table() const { return table_; }
  const SubspaceAllocator& allocator() const { return alloc_; }
  NicCounters& counters() { return counters_; }
  const NicCounters& counters() const { return counters_; }

  OutgoingResult on_outgoing(const FiveTuple& t);
  IncomingResult on_incoming(const FiveTuple& t, uint64_t pkt_seq);
  MessageResult on_rule_message(const RuleMessage& msg);

  bool has_pending(const ReverseKey& k) const { return pending_.count(k) > 0; }
  size_t pending_keys() const { return pending_.size(); }

  // Applies the rewrite for the packet's direction. False when the packet
  // does not match the rule (left unmodified).
  static bool translate(const NatRule& rule, Packet& pkt);

 private:
  uint32_t id_ = 0;
  NatTable table_;
  SubspaceAllocator alloc_;
  InstallMode mode_ = InstallMode::Passive;
  HashConfig hash_;
  NicCounters counters_;
  std::unordered_map<ReverseKey, std::vector<uint64_t>, KeyHash> pending_;
};

}  // namespace hypernat
