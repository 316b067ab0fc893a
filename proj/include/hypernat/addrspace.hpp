#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "hypernat/endpoint.hpp"

namespace hypernat {

// A rectangular endpoint space: a run of consecutive IPv4 addresses, each
// carrying the same contiguous port range. Endpoints are enumerated in
// canonical order (ip major, port minor), giving every endpoint a dense
// linear index in [0, size()).
struct EndpointRange {
  uint32_t ip_base = 0;
  uint32_t n_ips = 0;
  uint16_t port_lo = 0;
  uint16_t port_hi = 0;

  uint64_t ports_per_ip() const {
    return static_cast<uint64_t>(port_hi) - port_lo + 1;
  }
  uint64_t size() const { return n_ips * ports_per_ip(); }

  bool contains(const Endpoint& e) const {
    return e.ip >= ip_base && e.ip < ip_base + n_ips && e.port >= port_lo &&
           e.port <= port_hi;
  }

  uint64_t index_of(const Endpoint& e) const {
    return (e.ip - ip_base) * ports_per_ip() + (e.port - port_lo);
  }

  Endpoint at(uint64_t index) const {
    return Endpoint{static_cast<uint32_t>(ip_base + index / ports_per_ip()),
                    static_cast<uint16_t>(port_lo + index % ports_per_ip())};
  }
};

// Static partition of an external endpoint range into n disjoint contiguous
// subspaces. Sizes differ by at most one; the remainder goes to the lowest
// subspace indexes. Subspace ids are 1-based to match NIC ids.
class SubspacePlan {
 public:
  SubspacePlan() = default;

  // Throws std::invalid_argument when n == 0 or the range has fewer
  // endpoints than subspaces.
  static SubspacePlan partition(const EndpointRange& space, uint32_t n);

  uint32_t n_subspaces() const { return static_cast<uint32_t>(begin_.size()); }
  const EndpointRange& space() const { return space_; }

  // Linear index range [begin, end) of subspace id (1-based).
  uint64_t begin_index(uint32_t id) const { return begin_[id - 1]; }
  uint64_t end_index(uint32_t id) const { return end_[id - 1]; }
  uint64_t subspace_size(uint32_t id) const { return end_[id - 1] - begin_[id - 1]; }

  Endpoint first_endpoint(uint32_t id) const { return space_.at(begin_index(id)); }

  // O(1) reverse lookup; nullopt when the endpoint lies outside the space.
  std::optional<uint32_t> owner_of(const Endpoint& e) const;

 private:
  EndpointRange space_;
  std::vector<uint64_t> begin_;
  std::vector<uint64_t> end_;
  uint64_t base_size_ = 0;   // floor(|E| / n)
  uint64_t remainder_ = 0;   // first `remainder_` subspaces hold one extra
};

// Allocation state for one subspace. Hands out the lowest free endpoint in
// canonical order; released endpoints become reusable immediately.
class SubspaceAllocator {
 public:
  SubspaceAllocator() = default;
  SubspaceAllocator(const SubspacePlan& plan, uint32_t id)
      : space_(plan.space()),
        lo_(plan.begin_index(id)),
        hi_(plan.end_index(id)),
        watermark_(plan.begin_index(id)) {}

  // nullopt when the subspace is exhausted.
  std::optional<Endpoint> allocate();

  // False when the endpoint is not currently allocated (or out of range).
  bool release(const Endpoint& e);

  uint64_t allocated() const { return allocated_count_; }
  uint64_t capacity() const { return hi_ - lo_; }
  bool is_allocated(const Endpoint& e) const;

 private:
  EndpointRange space_;
  uint64_t lo_ = 0, hi_ = 0;
  uint64_t watermark_ = 0;          // lowest never-allocated index
  std::set<uint64_t> freed_;        // released indexes below the watermark
  std::set<uint64_t> in_use_;
  uint64_t allocated_count_ = 0;
};

}  // namespace hypernat
