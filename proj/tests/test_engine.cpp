#include <random>
#include <vector>

#include "doctest.h"
#include "hypernat/engine.hpp"

using namespace hypernat;

namespace {

// Connection whose return direction hashes to the other NIC under the
// default two-NIC dispatch (seed 0), exercising the fetch path.
FiveTuple cross_nic_tuple() {
  FiveTuple t;
  t.src = Endpoint{0x0A000005u, 1234};
  t.dst = Endpoint{0xC6336409u, 80};
  t.proto = 6;
  return t;
}

std::vector<TraceRecord> steady_trace(const FiveTuple& t, int n, Nanos spacing) {
  std::vector<TraceRecord> recs;
  for (int k = 0; k < n; ++k)
    recs.push_back(TraceRecord{k * spacing, t, 100, 1});
  return recs;
}

struct StateTally {
  uint64_t returned = 0, dropped = 0, in_flight = 0, unsent = 0;
};

StateTally tally(const RunResult& r) {
  StateTally s;
  for (const Packet& p : r.packets) {
    if (p.at(PacketEvent::Sent) < 0) {
      ++s.unsent;
    } else if (p.state == PacketState::Returned) {
      ++s.returned;
    } else if (p.state == PacketState::Dropped) {
      ++s.dropped;
    } else {
      ++s.in_flight;
    }
  }
  return s;
}

}  // namespace

TEST_CASE("pipeline composition: calibrated milestone timestamps") {
  FabricConfig cfg;
  auto trace = steady_trace(cross_nic_tuple(), 5, us_to_ns(2500));
  RunResult r = run(cfg, trace, Topology::HyperNat);
  REQUIRE(r.returned == 5);

  const Packet& first = r.packets[0];
  CHECK(first.at(PacketEvent::Sent) == 0);
  CHECK(first.at(PacketEvent::ArriveNicOut) == us_to_ns(100));
  CHECK(first.at(PacketEvent::RuleReadyOut) == us_to_ns(125));
  CHECK(first.at(PacketEvent::ArriveReceiver) == us_to_ns(225));
  CHECK(first.at(PacketEvent::EchoSent) == us_to_ns(325));
  CHECK(first.at(PacketEvent::ArriveNicIn) == us_to_ns(427));
  CHECK(first.at(PacketEvent::RuleReadyIn) == us_to_ns(2168));
  CHECK(first.at(PacketEvent::Returned) == us_to_ns(2269));

  for (int k = 1; k < 5; ++k) {
    const Packet& p = r.packets[k];
    CHECK(p.at(PacketEvent::Returned) - p.at(PacketEvent::Sent) == us_to_ns(621));
  }
  CHECK(r.tdc_pass);
  CHECK(r.coord_forwarded == 2);  // one fetch request, one reply
}

TEST_CASE("same-NIC return path needs no fetch") {
  // Brute-force a connection whose two directions hash together.
  FabricConfig cfg;
  HashConfig h{0, 2};
  SubspacePlan plan = SubspacePlan::partition(cfg.external_space, 2);
  FiveTuple pick;
  bool found = false;
  for (uint16_t port = 1024; port < 3000 && !found; ++port) {
    FiveTuple t;
    t.src = Endpoint{0x0A000005u, port};
    t.dst = Endpoint{0xC6336409u, 80};
    t.proto = 6;
    uint32_t i = assign_nic(t, h);
    // The rule's external is the first free endpoint of subspace i; with a
    // fresh engine that is the subspace head.
    FiveTuple back;
    back.src = t.dst;
    back.dst = plan.first_endpoint(i);
    back.proto = t.proto;
    if (assign_nic(back, h) == i) {
      pick = t;
      found = true;
    }
  }
  REQUIRE(found);
  auto trace = steady_trace(pick, 3, us_to_ns(2500));
  RunResult r = run(cfg, trace, Topology::HyperNat);
  REQUIRE(r.returned == 3);
  CHECK(r.coord_forwarded == 0);
  // Creation replaces the hit service on the slow path, so the first round
  // trip is 587 us; steady state is 621 us.
  CHECK(r.rtt[0] == us_to_ns(587));
  CHECK(r.rtt[1] == us_to_ns(621));
  CHECK(r.rtt[2] == us_to_ns(621));
}

TEST_CASE("parked packets flush one service apart") {
  FabricConfig cfg;
  auto trace = steady_trace(cross_nic_tuple(), 3, us_to_ns(10));
  RunResult r = run(cfg, trace, Topology::HyperNat);
  REQUIRE(r.returned == 3);
  // All three echoes park behind one fetch; the reply flushes them FIFO,
  // spaced by the 59 us service.
  CHECK(r.packets[0].at(PacketEvent::RuleReadyIn) == us_to_ns(2168));
  CHECK(r.packets[1].at(PacketEvent::RuleReadyIn) == us_to_ns(2168));
  CHECK(r.packets[2].at(PacketEvent::RuleReadyIn) == us_to_ns(2168));
  CHECK(r.packets[0].at(PacketEvent::Returned) == us_to_ns(2269));
  CHECK(r.packets[1].at(PacketEvent::Returned) == us_to_ns(2328));
  CHECK(r.packets[2].at(PacketEvent::Returned) == us_to_ns(2387));
  CHECK(r.per_nic[0].counters.fetch_requests + r.per_nic[1].counters.fetch_requests == 1);
}

TEST_CASE("reruns are bit-identical") {
  FabricConfig cfg;
  cfg.n_nics = 3;
  auto trace = gen_trace(cfg, 200, 5, 20000, 9);
  RunOptions opts;
  opts.collect_events = true;
  RunResult a = run(cfg, trace, Topology::HyperNat, opts);
  RunResult b = run(cfg, trace, Topology::HyperNat, opts);
  CHECK(a.returned == b.returned);
  CHECK(a.rtt == b.rtt);
  REQUIRE(a.events.size() == b.events.size());
  for (size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].ordinal == b.events[i].ordinal);
    CHECK(a.events[i].pkt == b.events[i].pkt);
    CHECK(a.events[i].flow == b.events[i].flow);
    CHECK(a.events[i].kind == b.events[i].kind);
    CHECK(a.events[i].t == b.events[i].t);
  }
  for (size_t n = 0; n < a.per_nic.size(); ++n) {
    CHECK(a.per_nic[n].counters.rule_creates == b.per_nic[n].counters.rule_creates);
    CHECK(a.per_nic[n].counters.fetch_requests == b.per_nic[n].counters.fetch_requests);
    CHECK(a.per_nic[n].out_busy == b.per_nic[n].out_busy);
    CHECK(a.per_nic[n].in_busy == b.per_nic[n].in_busy);
  }
}

TEST_CASE("conservation partition holds under randomized configs") {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 300; ++round) {
    FabricConfig cfg;
    cfg.n_nics = 1 + static_cast<uint32_t>(rng() % 4);
    cfg.hash_seed = rng();
    cfg.install_mode = rng() % 2 ? InstallMode::Active : InstallMode::Passive;
    uint32_t caps[] = {0, 0, 1, 2, 8};
    cfg.queue_cap = caps[rng() % 5];
    uint64_t flows = 1 + rng() % 40;
    uint64_t ppf = 1 + rng() % 6;
    double rate = 1000.0 * (1 + rng() % 2000);
    auto trace = gen_trace(cfg, flows, ppf, rate, rng());
    Topology topo = static_cast<Topology>(rng() % 3);
    RunOptions opts;
    if (rng() % 4 == 0) opts.horizon_override = static_cast<Nanos>(rng() % us_to_ns(5000));
    RunResult r = run(cfg, trace, topo, opts);

    StateTally s = tally(r);
    uint64_t drops = r.drops_exhausted + r.drops_unknown + r.drops_qfull;
    CHECK(r.emitted == r.returned + drops + r.in_flight);
    CHECK(r.emitted + r.not_emitted == trace.size());
    CHECK(s.returned == r.returned);
    CHECK(s.dropped == drops);
    CHECK(s.in_flight == r.in_flight);
    CHECK(s.unsent == r.not_emitted);
    CHECK(r.rtt.size() == r.returned);
    CHECK(r.tdc_violations == 0);
  }
}

TEST_CASE("passive and active modes agree on final translations") {
  std::mt19937_64 rng(57);
  for (int round = 0; round < 1000; ++round) {
    FabricConfig cfg;
    cfg.n_nics = 2 + static_cast<uint32_t>(rng() % 3);
    cfg.hash_seed = rng();
    uint64_t flows = 1 + rng() % 20;
    uint64_t ppf = 2 + rng() % 4;
    auto trace = gen_trace(cfg, flows, ppf, 5000.0, rng());

    FabricConfig active = cfg;
    active.install_mode = InstallMode::Active;
    RunResult pr = run(cfg, trace, Topology::HyperNat);
    RunResult ar = run(active, trace, Topology::HyperNat);

    CHECK(pr.tdc_pass);
    CHECK(ar.tdc_pass);
    CHECK(pr.returned == trace.size());
    CHECK(ar.returned + ar.drops_unknown == trace.size());
    REQUIRE(pr.flow_external.size() == flows);
    REQUIRE(ar.flow_external.size() == flows);
    for (const auto& [flow, ext] : pr.flow_external) {
      auto it = ar.flow_external.find(flow);
      REQUIRE(it != ar.flow_external.end());
      CHECK(it->second == ext);
    }
  }
}

TEST_CASE("single outstanding fetch per connection") {
  std::mt19937_64 rng(73);
  for (int round = 0; round < 1000; ++round) {
    FabricConfig cfg;
    cfg.n_nics = 2;
    cfg.hash_seed = rng();
    uint64_t flows = 1 + rng() % 10;
    // Tight spacing so several echoes of one flow park on the same fetch.
    auto trace = gen_trace(cfg, flows, 4, 2.0e6, rng());
    RunResult r = run(cfg, trace, Topology::HyperNat);
    uint64_t requests = 0, replies = 0;
    for (const auto& n : r.per_nic) {
      requests += n.counters.fetch_requests;
      replies += n.counters.fetch_replies;
      CHECK(n.counters.fetch_misses == 0);
    }
    CHECK(requests <= flows);  // at most one fetch per connection, ever
    CHECK(replies == requests);
    CHECK(r.returned == trace.size());
    CHECK(r.tdc_violations == 0);
  }
}

TEST_CASE("empty trace yields an empty run") {
  FabricConfig cfg;
  RunResult r = run(cfg, {}, Topology::HyperNat);
  CHECK(r.emitted == 0);
  CHECK(r.returned == 0);
  CHECK(r.in_flight == 0);
  CHECK(r.rtt.empty());
  CHECK(r.tdc_pass);
}

TEST_CASE("baseline topologies collapse to one element") {
  FabricConfig cfg;
  cfg.n_nics = 4;  // ignored off the hypernat topology
  auto trace = gen_trace(cfg, 10, 2, 1000, 3);
  RunResult one = run(cfg, trace, Topology::OneNic);
  RunResult srv = run(cfg, trace, Topology::ServerNat);
  CHECK(one.per_nic.size() == 1);
  CHECK(srv.per_nic.size() == 1);
  CHECK(one.returned == trace.size());
  CHECK(srv.returned == trace.size());
  CHECK(one.coord_forwarded == 0);  // a lone NIC never fetches
  CHECK(srv.coord_forwarded == 0);
}

TEST_CASE("underload throughput equals the offered rate") {
  FabricConfig cfg;
  SaturateParams p;
  p.flows = 50;
  p.warmup = us_to_ns(50000);
  p.window = us_to_ns(200000);
  SaturateResult s = saturate(cfg, Topology::HyperNat, 20000.0, p);
  CHECK(s.measured_pps == doctest::Approx(20000.0).epsilon(0.01));
}

TEST_CASE("saturated two-NIC fabric doubles the single-server rate") {
  // Needs a wide flow population: hashing splits flows binomially across the
  // NICs, and with few flows the imbalance strands capacity on one side.
  FabricConfig cfg;
  apply_config_kv(cfg, "nic_service_us", "1.382");
  SaturateParams p;
  p.flows = 10000;
  p.warmup = us_to_ns(500000);
  p.window = us_to_ns(500000);
  SaturateResult s = saturate(cfg, Topology::HyperNat, 2.0e6, p);
  CHECK(s.measured_pps == doctest::Approx(2.0e9 / 1382.0).epsilon(0.02));
}
