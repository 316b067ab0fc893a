#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "hypernat/config.hpp"
#include "hypernat/coordinator.hpp"
#include "hypernat/nic.hpp"
#include "hypernat/packet.hpp"
#include "hypernat/trace.hpp"

namespace hypernat {

// Engine event kinds, also the vocabulary of the event log.
enum class EventKind : uint8_t {
  ArriveAtSwitch,
  ArriveAtNic,
  NicServiceDone,
  RuleMsgDelivery,
  ArriveAtReceiver,
  ReceiverEcho,
  ReturnToSender,
};

const char* event_kind_name(EventKind k);

struct EventRow {
  uint64_t ordinal;  // processing order
  int64_t pkt;       // packet seq, -1 for control-plane events
  uint64_t flow;     // 0 for control-plane events
  EventKind kind;
  Nanos t;
};

struct PerNicStats {
  NicCounters counters;
  Nanos out_busy = 0;        // total occupied time, outgoing-direction server
  Nanos in_busy = 0;         // total occupied time, incoming-direction server
  size_t table_size = 0;
  size_t pending_keys = 0;   // keys still awaiting a fetch at horizon
  uint64_t subspace_begin = 0;
  uint64_t subspace_end = 0;
  std::string subspace_first;
  uint64_t allocated = 0;
};

struct RunResult {
  std::vector<Packet> packets;
  std::vector<PerNicStats> per_nic;  // [0] is NIC 1
  uint64_t coord_forwarded = 0;
  uint64_t coord_unknown = 0;

  uint64_t emitted = 0;
  uint64_t returned = 0;
  uint64_t returned_measured = 0;  // returns at/after RunOptions::measure_from
  uint64_t drops_exhausted = 0;
  uint64_t drops_unknown = 0;
  uint64_t drops_qfull = 0;
  uint64_t in_flight = 0;      // emitted but neither returned nor dropped
  uint64_t not_emitted = 0;    // trace records past the horizon

  std::vector<Nanos> rtt;      // completion order
  Nanos first_send = 0;
  Nanos last_event = 0;
  Nanos horizon = 0;
  uint64_t translated_total = 0;
  uint64_t n_flows = 0;

  bool tdc_pass = true;
  uint64_t tdc_violations = 0;

  // flow id -> external endpoint it was translated under (flows whose
  // packets reached translation at least once).
  std::unordered_map<uint64_t, Endpoint> flow_external;

  std::vector<EventRow> events;  // populated when requested
};

struct RunOptions {
  bool collect_events = false;
  std::string events_path;      // stream event CSV here when non-empty
  Nanos horizon_override = -1;  // < 0: trace end + cfg.drain
  Nanos measure_from = 0;
};

// Replays a validated trace through the chosen topology. Deterministic:
// identical (cfg, trace, topology, options) give identical results,
// including the event log, byte for byte.
RunResult run(const FabricConfig& cfg, const std::vector<TraceRecord>& trace,
              Topology topo, const RunOptions& opts = {});

struct SaturateParams {
  uint64_t flows = 10000;
  Nanos warmup = us_to_ns(static_cast<int64_t>(300000));
  Nanos window = us_to_ns(static_cast<int64_t>(300000));
  uint64_t seed = 1;
};

struct SaturateResult {
  double measured_pps = 0;  // completed round trips per second inside the window
  uint64_t returned_in_window = 0;
  RunResult run;
};

// Sustained offered load; reports the completed-round-trip rate over the
// measurement window, excluding warmup. Bounds queues (default 4096 slots)
// so saturation runs stay in bounded memory.
SaturateResult saturate(const FabricConfig& cfg, Topology topo, double offered_pps,
                        const SaturateParams& params = {});

}  // namespace hypernat
