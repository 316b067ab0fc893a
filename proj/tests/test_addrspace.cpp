#include <random>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "hypernat/addrspace.hpp"

using namespace hypernat;

namespace {

// 1 ip x 10 ports: endpoints .0:5000 .. .0:5009
EndpointRange tiny_range() { return EndpointRange{0xCB007100u, 1, 5000, 5009}; }

}  // namespace

TEST_CASE("endpoint range enumerates ip-major") {
  EndpointRange r{0x0A000000u, 2, 10, 12};  // 2 ips x 3 ports
  CHECK(r.size() == 6);
  CHECK(r.at(0) == Endpoint{0x0A000000u, 10});
  CHECK(r.at(2) == Endpoint{0x0A000000u, 12});
  CHECK(r.at(3) == Endpoint{0x0A000001u, 10});
  CHECK(r.at(5) == Endpoint{0x0A000001u, 12});
  for (uint64_t i = 0; i < r.size(); ++i) {
    CHECK(r.contains(r.at(i)));
    CHECK(r.index_of(r.at(i)) == i);
  }
  CHECK_FALSE(r.contains(Endpoint{0x0A000000u, 9}));
  CHECK_FALSE(r.contains(Endpoint{0x0A000002u, 10}));
}

TEST_CASE("partition splits 10 endpoints as 4,3,3") {
  SubspacePlan plan = SubspacePlan::partition(tiny_range(), 3);
  CHECK(plan.n_subspaces() == 3);
  CHECK(plan.subspace_size(1) == 4);
  CHECK(plan.subspace_size(2) == 3);
  CHECK(plan.subspace_size(3) == 3);
  CHECK(plan.begin_index(1) == 0);
  CHECK(plan.end_index(1) == 4);
  CHECK(plan.begin_index(2) == 4);
  CHECK(plan.end_index(3) == 10);
  CHECK(plan.first_endpoint(1).port == 5000);
  CHECK(plan.first_endpoint(2).port == 5004);
  CHECK(plan.first_endpoint(3).port == 5007);
}

TEST_CASE("partition of 100 endpoints into 4 equal subspaces") {
  EndpointRange r{0xCB007100u, 1, 0, 99};
  SubspacePlan plan = SubspacePlan::partition(r, 4);
  for (uint32_t id = 1; id <= 4; ++id) CHECK(plan.subspace_size(id) == 25);
  CHECK(plan.begin_index(3) == 50);
}

TEST_CASE("partition rejects degenerate arguments") {
  CHECK_THROWS_AS(SubspacePlan::partition(tiny_range(), 0), std::invalid_argument);
  CHECK_THROWS_AS(SubspacePlan::partition(tiny_range(), 11), std::invalid_argument);
  CHECK_NOTHROW(SubspacePlan::partition(tiny_range(), 10));
}

TEST_CASE("owner_of inverts the partition everywhere") {
  EndpointRange r{0xCB007100u, 16, 1024, 65535};
  std::mt19937_64 rng(42);
  for (uint32_t n : {1u, 2u, 3u, 7u, 16u, 101u}) {
    SubspacePlan plan = SubspacePlan::partition(r, n);
    // Exact boundary endpoints plus random probes.
    for (uint32_t id = 1; id <= n; ++id) {
      CHECK(plan.owner_of(r.at(plan.begin_index(id))) == id);
      CHECK(plan.owner_of(r.at(plan.end_index(id) - 1)) == id);
    }
    for (int k = 0; k < 2000; ++k) {
      uint64_t idx = rng() % r.size();
      auto owner = plan.owner_of(r.at(idx));
      REQUIRE(owner.has_value());
      CHECK(plan.begin_index(*owner) <= idx);
      CHECK(idx < plan.end_index(*owner));
    }
    CHECK_FALSE(plan.owner_of(Endpoint{0xCB007100u, 1023}).has_value());
    CHECK_FALSE(plan.owner_of(Endpoint{0xCB007110u, 2000}).has_value());
  }
}

TEST_CASE("partition sizes differ by at most one, remainder to low ids") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    uint32_t n_ips = 1 + static_cast<uint32_t>(rng() % 8);
    uint16_t lo = static_cast<uint16_t>(rng() % 1000);
    uint16_t hi = lo + static_cast<uint16_t>(rng() % 500);
    EndpointRange r{0x01000000u, n_ips, lo, hi};
    uint32_t n = 1 + static_cast<uint32_t>(rng() % r.size());
    SubspacePlan plan = SubspacePlan::partition(r, n);
    uint64_t base = r.size() / n, rem = r.size() % n, total = 0;
    for (uint32_t id = 1; id <= n; ++id) {
      uint64_t sz = plan.subspace_size(id);
      CHECK(sz == (id <= rem ? base + 1 : base));
      if (id > 1) CHECK(plan.begin_index(id) == plan.end_index(id - 1));
      total += sz;
    }
    CHECK(total == r.size());
  }
}

TEST_CASE("allocator hands out lowest free endpoint") {
  SubspacePlan plan = SubspacePlan::partition(tiny_range(), 3);
  SubspaceAllocator a(plan, 1);  // owns ports 5000..5003
  CHECK(a.capacity() == 4);
  CHECK(a.allocate()->port == 5000);
  CHECK(a.allocate()->port == 5001);
  CHECK(a.allocate()->port == 5002);
  CHECK(a.is_allocated(Endpoint{0xCB007100u, 5001}));

  SUBCASE("released endpoints are reused lowest-first") {
    CHECK(a.release(Endpoint{0xCB007100u, 5000}));
    CHECK(a.release(Endpoint{0xCB007100u, 5002}));
    CHECK(a.allocate()->port == 5000);
    CHECK(a.allocate()->port == 5002);
    CHECK(a.allocate()->port == 5003);
    CHECK_FALSE(a.allocate().has_value());  // exhausted
  }

  SUBCASE("exhaustion and recovery") {
    CHECK(a.allocate()->port == 5003);
    CHECK(a.allocated() == 4);
    CHECK_FALSE(a.allocate().has_value());
    CHECK(a.release(Endpoint{0xCB007100u, 5003}));
    CHECK(a.allocate()->port == 5003);
  }

  SUBCASE("release of free or foreign endpoint fails") {
    CHECK_FALSE(a.release(Endpoint{0xCB007100u, 5003}));  // never allocated
    CHECK_FALSE(a.release(Endpoint{0xCB007100u, 5007}));  // other subspace
    CHECK(a.release(Endpoint{0xCB007100u, 5000}));
    CHECK_FALSE(a.release(Endpoint{0xCB007100u, 5000}));  // double release
  }
}

TEST_CASE("allocator stays lowest-free under random churn") {
  EndpointRange r{0xCB007100u, 1, 100, 399};
  SubspacePlan plan = SubspacePlan::partition(r, 1);
  SubspaceAllocator a(plan, 1);
  std::mt19937_64 rng(99);
  std::set<uint64_t> model;  // allocated indexes
  for (int step = 0; step < 5000; ++step) {
    if (model.size() < 300 && (rng() % 2 == 0 || model.empty())) {
      auto got = a.allocate();
      REQUIRE(got.has_value());
      // Lowest free index in the model.
      uint64_t want = 0;
      while (model.count(want)) ++want;
      CHECK(r.index_of(*got) == want);
      model.insert(want);
    } else {
      auto it = model.begin();
      std::advance(it, rng() % model.size());
      CHECK(a.release(r.at(*it)));
      model.erase(it);
    }
    CHECK(a.allocated() == model.size());
  }
}
