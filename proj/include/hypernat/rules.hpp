#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>

#include "hypernat/endpoint.hpp"

namespace hypernat {

// One NAT binding. Both traffic directions share it: outgoing rewrites
// src internal -> external, incoming rewrites dst external -> internal.
struct NatRule {
  Endpoint internal;
  Endpoint external;
  Endpoint remote;
  uint8_t proto = 17;
  uint32_t owner_nic = 0;  // NIC that created the rule and owns the subspace

  auto operator<=>(const NatRule&) const = default;
};

// Lookup key for outgoing traffic: who is talking to whom.
struct ForwardKey {
  Endpoint internal;
  Endpoint remote;
  uint8_t proto = 17;
  auto operator<=>(const ForwardKey&) const = default;
};

// Lookup key for incoming traffic: remote peer -> external endpoint.
struct ReverseKey {
  Endpoint remote;
  Endpoint external;
  uint8_t proto = 17;
  auto operator<=>(const ReverseKey&) const = default;
};

struct KeyHash {
  static uint64_t mix(uint64_t h, uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
  size_t operator()(const ForwardKey& k) const {
    return mix(mix(k.internal.index(), k.remote.index()), k.proto);
  }
  size_t operator()(const ReverseKey& k) const {
    return mix(mix(k.remote.index(), k.external.index()), k.proto);
  }
};

inline ForwardKey forward_key(const NatRule& r) {
  return ForwardKey{r.internal, r.remote, r.proto};
}
inline ReverseKey reverse_key(const NatRule& r) {
  return ReverseKey{r.remote, r.external, r.proto};
}

// Both directions of one NIC's rule store. Insertion is idempotent for an
// identical rule; both maps always hold the same rule set.
class NatTable {
 public:
  // Returns true when the rule was new.
  bool install(const NatRule& r) {
    auto [it, fresh] = fwd_.try_emplace(forward_key(r), r);
    if (!fresh) return false;
    rev_.emplace(reverse_key(r), r);
    return true;
  }

  const NatRule* find_forward(const ForwardKey& k) const {
    auto it = fwd_.find(k);
    return it == fwd_.end() ? nullptr : &it->second;
  }
  const NatRule* find_reverse(const ReverseKey& k) const {
    auto it = rev_.find(k);
    return it == rev_.end() ? nullptr : &it->second;
  }

  size_t size() const { return fwd_.size(); }
  const std::unordered_map<ForwardKey, NatRule, KeyHash>& forward_map() const {
    return fwd_;
  }

 private:
  std::unordered_map<ForwardKey, NatRule, KeyHash> fwd_;
  std::unordered_map<ReverseKey, NatRule, KeyHash> rev_;
};

enum class RuleMsgKind : uint8_t { Install, FetchRequest, FetchReply, FetchMiss };

// Control-plane message routed NIC-to-NIC through the coordinator.
struct RuleMessage {
  RuleMsgKind kind = RuleMsgKind::Install;
  uint32_t from_nic = 0;
  uint32_t to_nic = 0;
  NatRule rule;      // payload for Install / FetchReply
  ReverseKey key;    // subject for FetchRequest / FetchMiss
};

}  // namespace hypernat
