#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "hypernat/addrspace.hpp"
#include "hypernat/nic.hpp"
#include "hypernat/time.hpp"

#include "json.hpp"

namespace hypernat {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Topology : uint8_t { HyperNat, OneNic, ServerNat };

Topology parse_topology(const std::string& s);  // throws ConfigError
std::string topology_name(Topology t);

// Everything a simulation run depends on. Defaults reproduce the
// calibrated single-connection latency profile; throughput studies
// override the two service times (see README, "Calibration").
struct FabricConfig {
  uint32_t n_nics = 2;
  uint64_t hash_seed = 0;
  InstallMode install_mode = InstallMode::Passive;

  // Per-cable propagation, by directed segment.
  Nanos link_sender_nic = us_to_ns(100);
  Nanos link_nic_recv = us_to_ns(100);
  Nanos link_recv_nic = us_to_ns(102);
  Nanos link_nic_sender = us_to_ns(101);

  // Data-path service. A table hit costs the per-packet service; a miss
  // on the outgoing side costs rule_create instead (slow path, creation
  // and forwarding in one).
  Nanos nic_service = us_to_ns(59);
  Nanos server_service = us_to_ns(0.781);
  Nanos rule_create = us_to_ns(25);

  // Passive-fetch machinery. coord_hop per leg, four legs per fetch;
  // fetch_lookup is the owner-side latency between request delivery and
  // reply emission; fetch_service is the data-path occupancy charged at
  // each endpoint of a fetch (owner lookup, requester install).
  Nanos coord_hop = us_to_ns(400);
  Nanos fetch_lookup = us_to_ns(141);
  Nanos fetch_service = us_to_ns(50);

  Nanos recv_service = us_to_ns(100);  // receiver echo turnaround (pure delay)

  double coord_capacity_mps = 0;  // messages/s through the coordinator; 0 = unlimited
  uint32_t queue_cap = 0;         // per-direction NIC queue slots; 0 = unbounded
  Nanos drain = us_to_ns(static_cast<int64_t>(1000000));
  double sender_rate_pps = 2000000;

  // Address spaces: internal tenants, external NAT pool, remote peers.
  EndpointRange internal_space{0x0A000000u, 256, 1024, 65535};   // 10.0.0.0
  EndpointRange external_space{0xCB007100u, 16, 1024, 65535};    // 203.0.113.0
  EndpointRange remote_space{0xC6336400u, 256, 1, 65535};        // 198.51.100.0

  // Throws ConfigError when a constraint is violated.
  void validate() const;

  nlohmann::json to_json() const;
};

// Applies one "key=value" assignment; throws ConfigError on unknown keys
// or unparsable values.
void apply_config_kv(FabricConfig& cfg, const std::string& key, const std::string& value);

// Flat key=value file, one assignment per line, '#' comments.
FabricConfig load_config_file(const std::string& path);

}  // namespace hypernat
