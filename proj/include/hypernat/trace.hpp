#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypernat/config.hpp"
#include "hypernat/endpoint.hpp"
#include "hypernat/time.hpp"

namespace hypernat {

// Malformed trace content. line is 1-based; 0 means the file as a whole.
struct TraceError : std::runtime_error {
  int line;
  TraceError(int line_, const std::string& msg)
      : std::runtime_error("trace line " + std::to_string(line_) + ": " + msg),
        line(line_) {}
};

struct TraceRecord {
  Nanos t = 0;
  FiveTuple tuple;
  uint32_t size_bytes = 0;
  uint64_t flow_id = 0;  // 1-based, order of first appearance
};

inline constexpr const char* kTraceHeader =
    "t_us,src_ip,src_port,dst_ip,dst_port,proto,size_bytes";

// Reads and validates a trace CSV: header, field syntax, non-decreasing
// timestamps, src inside the internal space, dst inside the remote space.
// Assigns flow ids by first appearance.
std::vector<TraceRecord> load_trace(const std::string& path, const FabricConfig& cfg);

// Synthetic workload: n_flows distinct (src, dst) pairs drawn uniformly
// from internal x remote, pkts_per_flow packets each, interleaved
// round-robin at an aggregate rate_pps. Deterministic in seed.
// Throws ConfigError("space too small ...") when the tuple space cannot
// host n_flows distinct connections.
std::vector<TraceRecord> gen_trace(const FabricConfig& cfg, uint64_t n_flows,
                                   uint64_t pkts_per_flow, double rate_pps,
                                   uint64_t seed);

void write_trace(const std::string& path, const std::vector<TraceRecord>& recs);

}  // namespace hypernat
