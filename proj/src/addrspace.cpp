#include "hypernat/addrspace.hpp"

#include <stdexcept>

namespace hypernat {

SubspacePlan SubspacePlan::partition(const EndpointRange& space, uint32_t n) {
  if (n == 0) throw std::invalid_argument("partition: n must be >= 1");
  if (space.size() < n)
    throw std::invalid_argument("partition: external space smaller than subspace count");

  SubspacePlan plan;
  plan.space_ = space;
  plan.base_size_ = space.size() / n;
  plan.remainder_ = space.size() % n;
  uint64_t cursor = 0;
  for (uint32_t i = 0; i < n; ++i) {
    uint64_t sz = plan.base_size_ + (i < plan.remainder_ ? 1 : 0);
    plan.begin_.push_back(cursor);
    plan.end_.push_back(cursor + sz);
    cursor += sz;
  }
  return plan;
}

std::optional<uint32_t> SubspacePlan::owner_of(const Endpoint& e) const {
  if (begin_.empty() || !space_.contains(e)) return std::nullopt;
  uint64_t idx = space_.index_of(e);
  // First `remainder_` subspaces have base_size_+1 entries, the rest base_size_.
  uint64_t fat = remainder_ * (base_size_ + 1);
  uint64_t id;
  if (idx < fat) {
    id = idx / (base_size_ + 1);
  } else {
    id = remainder_ + (idx - fat) / base_size_;
  }
  return static_cast<uint32_t>(id) + 1;
}

std::optional<Endpoint> SubspaceAllocator::allocate() {
  uint64_t idx;
  if (!freed_.empty()) {
    idx = *freed_.begin();
    freed_.erase(freed_.begin());
  } else if (watermark_ < hi_) {
    idx = watermark_++;
  } else {
    return std::nullopt;  // exhausted
  }
  in_use_.insert(idx);
  ++allocated_count_;
  return space_.at(idx);
}

bool SubspaceAllocator::release(const Endpoint& e) {
  if (!space_.contains(e)) return false;
  uint64_t idx = space_.index_of(e);
  auto it = in_use_.find(idx);
  if (it == in_use_.end()) return false;
  in_use_.erase(it);
  freed_.insert(idx);
  --allocated_count_;
  return true;
}

bool SubspaceAllocator::is_allocated(const Endpoint& e) const {
  return space_.contains(e) && in_use_.count(space_.index_of(e)) > 0;
}

}  // namespace hypernat
