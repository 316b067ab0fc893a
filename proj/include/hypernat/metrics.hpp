#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hypernat/config.hpp"
#include "hypernat/engine.hpp"
#include "json.hpp"

namespace hypernat {

// Nearest-rank percentile (q in (0, 1]) over an unsorted sample set.
// Throws ConfigError on an empty sample set or q out of range.
Nanos percentile_ns(std::vector<Nanos> samples, double q);

struct RttStats {
  uint64_t count = 0;
  Nanos p50 = 0, p90 = 0, p99 = 0, p999 = 0;
  Nanos min = 0, max = 0;
  double mean_us = 0;
};

RttStats rtt_stats(const std::vector<Nanos>& rtt);

// Cumulative distribution sampled at up to `points` evenly spaced ranks.
struct CdfPoint {
  double fraction;  // (0, 1]
  Nanos value;
};
std::vector<CdfPoint> cdf(std::vector<Nanos> samples, size_t points = 1000);
void write_cdf_csv(const std::string& path, const std::vector<CdfPoint>& curve);

// Full per-run report, serializable for the CLI.
nlohmann::json build_report(const FabricConfig& cfg, Topology topo, const RunResult& r);

// One run's contribution to a cross-run aggregate.
struct RunSummary {
  uint64_t returned = 0;
  uint64_t translated = 0;
  Nanos elapsed = 0;  // makespan the rates are measured over
  std::vector<Nanos> rtt;
};

struct Aggregate {
  uint64_t returned = 0;
  uint64_t translated = 0;
  Nanos elapsed = 0;
  double throughput_pps = 0;  // recomputed from summed counts and time
  double processed_pps = 0;
  RttStats rtt;
};

// Merges run summaries; rates are recomputed from totals, never averaged.
// Throws ConfigError when `runs` is empty.
Aggregate aggregate(const std::vector<RunSummary>& runs);

RunSummary summarize(const RunResult& r);

}  // namespace hypernat
