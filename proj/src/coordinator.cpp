#include "hypernat/coordinator.hpp"

#include <algorithm>

namespace hypernat {

std::optional<Nanos> Coordinator::route(Nanos now, const RuleMessage& msg) {
  if (msg.to_nic < 1 || msg.to_nic > n_nics_) {
    ++unknown_drops_;
    return std::nullopt;
  }
  Nanos at_coord = now + hop_ns_;
  if (service_ns_ > 0) {
    Nanos start = std::max(at_coord, busy_until_);
    busy_until_ = start + service_ns_;
    at_coord = busy_until_;
  }
  ++forwarded_;
  return at_coord + hop_ns_;
}

}  // namespace hypernat
