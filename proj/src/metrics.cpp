#include "hypernat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace hypernat {

namespace {

Nanos nearest_rank(const std::vector<Nanos>& sorted, double q) {
  size_t n = sorted.size();
  size_t rank = static_cast<size_t>(std::ceil(q * static_cast<double>(n)));
  if (rank == 0) rank = 1;
  if (rank > n) rank = n;
  return sorted[rank - 1];
}

}  // namespace

Nanos percentile_ns(std::vector<Nanos> samples, double q) {
  if (samples.empty()) throw ConfigError("percentile of empty sample set");
  if (q <= 0 || q > 1) throw ConfigError("percentile rank out of range");
  std::sort(samples.begin(), samples.end());
  return nearest_rank(samples, q);
}

RttStats rtt_stats(const std::vector<Nanos>& rtt) {
  RttStats s;
  s.count = rtt.size();
  if (rtt.empty()) return s;
  std::vector<Nanos> sorted = rtt;
  std::sort(sorted.begin(), sorted.end());
  s.p50 = nearest_rank(sorted, 0.50);
  s.p90 = nearest_rank(sorted, 0.90);
  s.p99 = nearest_rank(sorted, 0.99);
  s.p999 = nearest_rank(sorted, 0.999);
  s.min = sorted.front();
  s.max = sorted.back();
  long double sum = 0;
  for (Nanos v : sorted) sum += static_cast<long double>(v);
  s.mean_us = static_cast<double>(sum / static_cast<long double>(sorted.size()) / 1000.0L);
  return s;
}

std::vector<CdfPoint> cdf(std::vector<Nanos> samples, size_t points) {
  std::vector<CdfPoint> out;
  if (samples.empty() || points == 0) return out;
  std::sort(samples.begin(), samples.end());
  size_t n = samples.size();
  size_t steps = std::min(points, n);
  out.reserve(steps);
  for (size_t i = 1; i <= steps; ++i) {
    size_t rank = i * n / steps;  // last step always hits rank n
    if (rank == 0) rank = 1;
    out.push_back(CdfPoint{static_cast<double>(rank) / static_cast<double>(n),
                           samples[rank - 1]});
  }
  return out;
}

void write_cdf_csv(const std::string& path, const std::vector<CdfPoint>& curve) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open " + path);
  f << "fraction,rtt_us\n";
  for (const CdfPoint& p : curve) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", p.fraction);
    f << buf << ',' << format_us(p.value) << '\n';
  }
}

nlohmann::json build_report(const FabricConfig& cfg, Topology topo, const RunResult& r) {
  nlohmann::json j;
  j["topology"] = topology_name(topo);
  j["config"] = cfg.to_json();

  nlohmann::json totals;
  totals["trace_packets"] = r.packets.size();
  totals["emitted"] = r.emitted;
  totals["returned"] = r.returned;
  totals["drops_exhausted"] = r.drops_exhausted;
  totals["drops_unknown"] = r.drops_unknown;
  totals["drops_qfull"] = r.drops_qfull;
  totals["in_flight"] = r.in_flight;
  totals["not_emitted"] = r.not_emitted;
  totals["translated"] = r.translated_total;
  totals["flows"] = r.n_flows;
  j["totals"] = totals;

  Nanos makespan = r.last_event - r.first_send;
  j["elapsed_us"] = format_us(makespan);
  j["horizon_us"] = format_us(r.horizon);
  double span_s = static_cast<double>(makespan) / 1e9;
  j["throughput_pps"] = span_s > 0 ? static_cast<double>(r.returned) / span_s : 0.0;
  j["processed_pps"] = span_s > 0 ? static_cast<double>(r.translated_total) / span_s : 0.0;

  RttStats s = rtt_stats(r.rtt);
  nlohmann::json rtt;
  rtt["count"] = s.count;
  rtt["p50_us"] = format_us(s.p50);
  rtt["p90_us"] = format_us(s.p90);
  rtt["p99_us"] = format_us(s.p99);
  rtt["p999_us"] = format_us(s.p999);
  rtt["min_us"] = format_us(s.min);
  rtt["max_us"] = format_us(s.max);
  rtt["mean_us"] = s.mean_us;
  j["rtt"] = rtt;

  nlohmann::json nics = nlohmann::json::array();
  for (size_t i = 0; i < r.per_nic.size(); ++i) {
    const PerNicStats& p = r.per_nic[i];
    nlohmann::json n;
    n["nic"] = i + 1;
    n["subspace_begin"] = p.subspace_begin;
    n["subspace_end"] = p.subspace_end;
    n["subspace_first_endpoint"] = p.subspace_first;
    n["allocated"] = p.allocated;
    n["table_size"] = p.table_size;
    n["pending_keys"] = p.pending_keys;
    n["rule_creates"] = p.counters.rule_creates;
    n["fetch_requests"] = p.counters.fetch_requests;
    n["fetch_replies"] = p.counters.fetch_replies;
    n["fetch_misses"] = p.counters.fetch_misses;
    n["installs_received"] = p.counters.installs_received;
    n["translated_out"] = p.counters.translated_out;
    n["translated_in"] = p.counters.translated_in;
    n["drops_exhausted"] = p.counters.drops_exhausted;
    n["drops_unknown"] = p.counters.drops_unknown;
    n["drops_qfull"] = p.counters.drops_qfull;
    n["out_busy_us"] = format_us(p.out_busy);
    n["in_busy_us"] = format_us(p.in_busy);
    if (makespan > 0) {
      n["out_utilization"] = static_cast<double>(p.out_busy) / static_cast<double>(makespan);
      n["in_utilization"] = static_cast<double>(p.in_busy) / static_cast<double>(makespan);
    }
    nics.push_back(n);
  }
  j["nics"] = nics;

  nlohmann::json coord;
  coord["messages_forwarded"] = r.coord_forwarded;
  coord["unknown_target_drops"] = r.coord_unknown;
  j["coordinator"] = coord;

  nlohmann::json tdc;
  tdc["pass"] = r.tdc_pass;
  tdc["violations"] = r.tdc_violations;
  j["tdc_check"] = tdc;
  return j;
}

RunSummary summarize(const RunResult& r) {
  RunSummary s;
  s.returned = r.returned;
  s.translated = r.translated_total;
  s.elapsed = r.last_event - r.first_send;
  s.rtt = r.rtt;
  return s;
}

Aggregate aggregate(const std::vector<RunSummary>& runs) {
  if (runs.empty()) throw ConfigError("aggregate of zero runs");
  Aggregate a;
  std::vector<Nanos> all;
  for (const RunSummary& r : runs) {
    a.returned += r.returned;
    a.translated += r.translated;
    a.elapsed += r.elapsed;
    all.insert(all.end(), r.rtt.begin(), r.rtt.end());
  }
  double span_s = static_cast<double>(a.elapsed) / 1e9;
  a.throughput_pps = span_s > 0 ? static_cast<double>(a.returned) / span_s : 0.0;
  a.processed_pps = span_s > 0 ? static_cast<double>(a.translated) / span_s : 0.0;
  a.rtt = rtt_stats(all);
  return a;
}

}  // namespace hypernat
