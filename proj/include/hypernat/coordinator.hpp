#pragma once

#include <cstdint>
#include <optional>

#include "hypernat/rules.hpp"
#include "hypernat/time.hpp"

namespace hypernat {

// Reliable NIC-to-NIC message relay living on the host. A message crosses
// two hops (source NIC -> coordinator -> target NIC), each costing hop_ns.
// With a finite capacity the coordinator serializes messages through a
// single FIFO server; by default it forwards without contention. Constant
// per-pair latency plus FIFO service keeps per-pair delivery order equal
// to send order.
class Coordinator {
 public:
  Coordinator() = default;
  Coordinator(uint32_t n_nics, Nanos hop_ns, double capacity_msgs_per_s)
      : n_nics_(n_nics), hop_ns_(hop_ns) {
    if (capacity_msgs_per_s > 0)
      service_ns_ = static_cast<Nanos>(1e9 / capacity_msgs_per_s);
  }

  // Delivery time at the target NIC, or nullopt for an unregistered target
  // (counted and dropped).
  std::optional<Nanos> route(Nanos now, const RuleMessage& msg);

  uint64_t messages_forwarded() const { return forwarded_; }
  uint64_t unknown_target_drops() const { return unknown_drops_; }

 private:
  uint32_t n_nics_ = 0;
  Nanos hop_ns_ = 0;
  Nanos service_ns_ = 0;  // 0 = unlimited capacity
  Nanos busy_until_ = 0;
  uint64_t forwarded_ = 0;
  uint64_t unknown_drops_ = 0;
};

}  // namespace hypernat
