#include "hypernat/trace.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <unordered_set>

namespace hypernat {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

uint64_t parse_field_u64(int line, const char* what, const std::string& v, uint64_t max) {
  uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || out > max)
    throw TraceError(line, std::string("bad ") + what + ": " + v);
  return out;
}

// Bounded draw from raw engine output. The modulo bias is negligible for
// the space sizes involved and keeps the sequence identical across
// platforms (std::uniform_int_distribution is not portable).
uint64_t draw(std::mt19937_64& rng, uint64_t n) { return rng() % n; }

}  // namespace

std::vector<TraceRecord> load_trace(const std::string& path, const FabricConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw TraceError(0, "cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw TraceError(0, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw TraceError(1, "bad header, expected " + std::string(kTraceHeader));

  std::vector<TraceRecord> recs;
  std::map<FiveTuple, uint64_t> flow_ids;
  Nanos prev_t = -1;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 7) throw TraceError(lineno, "expected 7 fields");

    TraceRecord r;
    try {
      size_t pos = 0;
      double us = std::stod(f[0], &pos);
      if (pos != f[0].size() || us < 0 || !std::isfinite(us))
        throw std::invalid_argument(f[0]);
      r.t = us_to_ns(us);
    } catch (const std::exception&) {
      throw TraceError(lineno, "bad t_us: " + f[0]);
    }
    auto src_ip = parse_ip(f[1]);
    if (!src_ip) throw TraceError(lineno, "bad src_ip: " + f[1]);
    auto dst_ip = parse_ip(f[3]);
    if (!dst_ip) throw TraceError(lineno, "bad dst_ip: " + f[3]);
    r.tuple.src = Endpoint{*src_ip, static_cast<uint16_t>(parse_field_u64(lineno, "src_port", f[2], 65535))};
    r.tuple.dst = Endpoint{*dst_ip, static_cast<uint16_t>(parse_field_u64(lineno, "dst_port", f[4], 65535))};
    r.tuple.proto = static_cast<uint8_t>(parse_field_u64(lineno, "proto", f[5], 255));
    r.size_bytes = static_cast<uint32_t>(parse_field_u64(lineno, "size_bytes", f[6], UINT32_MAX));

    if (r.t < prev_t) throw TraceError(lineno, "timestamps not sorted");
    prev_t = r.t;
    if (!cfg.internal_space.contains(r.tuple.src))
      throw TraceError(lineno, "src outside internal space: " + format_endpoint(r.tuple.src));
    if (!cfg.remote_space.contains(r.tuple.dst))
      throw TraceError(lineno, "dst outside remote space: " + format_endpoint(r.tuple.dst));

    auto [it, fresh] = flow_ids.try_emplace(r.tuple, flow_ids.size() + 1);
    r.flow_id = it->second;
    (void)fresh;
    recs.push_back(r);
  }
  return recs;
}

std::vector<TraceRecord> gen_trace(const FabricConfig& cfg, uint64_t n_flows,
                                   uint64_t pkts_per_flow, double rate_pps,
                                   uint64_t seed) {
  if (n_flows == 0 || pkts_per_flow == 0)
    throw ConfigError("gen_trace: flows and packets per flow must be >= 1");
  if (rate_pps <= 0) throw ConfigError("gen_trace: rate must be positive");

  const uint64_t i_size = cfg.internal_space.size();
  const uint64_t r_size = cfg.remote_space.size();
  // Capacity check in floating point to survive i_size * r_size overflow.
  if (static_cast<double>(i_size) * static_cast<double>(r_size) <
      static_cast<double>(n_flows))
    throw ConfigError("space too small: internal x remote holds fewer than " +
                      std::to_string(n_flows) + " distinct connections");

  std::mt19937_64 rng(seed);
  std::vector<FiveTuple> flows;
  flows.reserve(n_flows);
  std::unordered_set<uint64_t> used;  // src_idx * r_size + dst_idx, sizes permitting
  const bool dense_key = r_size < (UINT64_MAX / (i_size + 1));
  std::map<FiveTuple, bool> used_wide;
  while (flows.size() < n_flows) {
    uint64_t si = draw(rng, i_size);
    uint64_t di = draw(rng, r_size);
    FiveTuple t;
    t.src = cfg.internal_space.at(si);
    t.dst = cfg.remote_space.at(di);
    t.proto = static_cast<uint8_t>(Proto::Udp);
    if (dense_key) {
      if (!used.insert(si * r_size + di).second) continue;
    } else {
      if (!used_wide.emplace(t, true).second) continue;
    }
    flows.push_back(t);
  }

  std::vector<TraceRecord> recs;
  recs.reserve(n_flows * pkts_per_flow);
  const double gap_ns = 1e9 / rate_pps;
  uint64_t total = n_flows * pkts_per_flow;
  for (uint64_t k = 0; k < total; ++k) {
    TraceRecord r;
    r.t = static_cast<Nanos>(std::llround(static_cast<double>(k) * gap_ns));
    r.tuple = flows[k % n_flows];
    r.size_bytes = 100;
    r.flow_id = k % n_flows + 1;
    recs.push_back(r);
  }
  return recs;
}

void write_trace(const std::string& path, const std::vector<TraceRecord>& recs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write trace file: " + path);
  out << kTraceHeader << "\n";
  for (const auto& r : recs) {
    out << format_us(r.t) << ',' << format_ip(r.tuple.src.ip) << ',' << r.tuple.src.port
        << ',' << format_ip(r.tuple.dst.ip) << ',' << r.tuple.dst.port << ','
        << static_cast<unsigned>(r.tuple.proto) << ',' << r.size_bytes << "\n";
  }
}

}  // namespace hypernat
