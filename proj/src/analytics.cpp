#include "hypernat/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypernat {

namespace {

// splitmix64 output mix; bijective over 64-bit words.
inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// splitmix64; passes through the full 64-bit state space, zero-safe.
inline uint64_t splitmix64(uint64_t& s) {
  s += 0x9e3779b97f4a7c15ULL;
  return mix64(s);
}

constexpr double kZ95 = 1.959963984540054;

}  // namespace

OverflowBounds overflow_bounds(double flows, double pool, uint32_t nics) {
  if (!(pool > 0)) throw std::invalid_argument("pool must be positive");
  if (!(flows >= 0)) throw std::invalid_argument("flows must be non-negative");
  if (nics == 0) throw std::invalid_argument("nics must be positive");
  OverflowBounds b;
  double ratio = flows / pool;
  b.per_nic_markov = std::min(1.0, ratio);
  b.any_exact = 1.0 - std::pow(1.0 - b.per_nic_markov, static_cast<double>(nics));
  b.any_linear = std::min(1.0, ratio * static_cast<double>(nics));
  return b;
}

WilsonInterval wilson95(uint64_t successes, uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  if (successes > trials) throw std::invalid_argument("successes exceed trials");
  double n = static_cast<double>(trials);
  double p = static_cast<double>(successes) / n;
  double z2 = kZ95 * kZ95;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2.0 * n)) / denom;
  double half = (kZ95 / denom) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  WilsonInterval w;
  w.estimate = p;
  w.lo = std::max(0.0, center - half);
  w.hi = std::min(1.0, center + half);
  return w;
}

McOverflowResult mc_overflow(uint64_t flows, uint64_t pool, uint32_t nics,
                             uint64_t trials, uint64_t seed) {
  if (pool == 0) throw std::invalid_argument("pool must be positive");
  if (nics == 0) throw std::invalid_argument("nics must be positive");
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  McOverflowResult r;
  r.trials = trials;
  uint64_t cap = pool / nics;  // each NIC owns at least this many endpoints
  if (flows > cap) {
    std::vector<uint64_t> counts(nics);
    for (uint64_t t = 0; t < trials; ++t) {
      std::fill(counts.begin(), counts.end(), 0);
      // Per-trial stream, start state finalizer-mixed: the raw xor'd counter
      // advances by the same constant splitmix64 adds per draw, so without
      // the mix trial t+1 replays trial t shifted by one draw and trial
      // outcomes correlate.
      uint64_t s = mix64(seed ^ (0x9e3779b97f4a7c15ULL * (t + 1)));
      bool overflow = false;
      for (uint64_t f = 0; f < flows && !overflow; ++f) {
        uint64_t bin = splitmix64(s) % nics;
        overflow = ++counts[bin] > cap;
      }
      if (overflow) ++r.overflows;
    }
  }
  r.ci = wilson95(r.overflows, trials);
  return r;
}

std::vector<AvailabilityCell> availability_grid(uint32_t max_nics, uint64_t trials,
                                                uint64_t seed) {
  // Per-ratio (flows, pool) pairs picked so flows stays small: Monte Carlo
  // cost is O(trials * flows) per cell.
  struct GridRow {
    double ratio;
    uint64_t flows, pool;
  };
  static const GridRow rows[] = {
      {1e-5, 1, 100000}, {1e-4, 10, 100000}, {1e-3, 100, 100000},
      {1e-2, 100, 10000}, {1e-1, 100, 1000},
  };
  std::vector<AvailabilityCell> cells;
  uint64_t cell_seed = seed;
  for (const GridRow& row : rows) {
    for (uint32_t n = 1; n <= max_nics; ++n) {
      AvailabilityCell c;
      c.ratio = row.ratio;
      c.flows = row.flows;
      c.pool = row.pool;
      c.nics = n;
      c.bounds = overflow_bounds(static_cast<double>(row.flows),
                                 static_cast<double>(row.pool), n);
      c.mc = mc_overflow(row.flows, row.pool, n, trials, ++cell_seed);
      cells.push_back(c);
    }
  }
  return cells;
}

nlohmann::json availability_json(const std::vector<AvailabilityCell>& cells) {
  nlohmann::json arr = nlohmann::json::array();
  for (const AvailabilityCell& c : cells) {
    nlohmann::json j;
    j["ratio"] = c.ratio;
    j["flows"] = c.flows;
    j["pool"] = c.pool;
    j["nics"] = c.nics;
    j["per_nic_markov"] = c.bounds.per_nic_markov;
    j["any_exact"] = c.bounds.any_exact;
    j["any_linear"] = c.bounds.any_linear;
    j["mc_estimate"] = c.mc.ci.estimate;
    j["mc_ci_lo"] = c.mc.ci.lo;
    j["mc_ci_hi"] = c.mc.ci.hi;
    j["mc_trials"] = c.mc.trials;
    arr.push_back(j);
  }
  return arr;
}

void write_availability_csv(const std::string& path,
                            const std::vector<AvailabilityCell>& cells) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "ratio,flows,pool,nics,per_nic_markov,any_exact,any_linear,mc_estimate,"
       "mc_ci_lo,mc_ci_hi,mc_trials\n";
  for (const AvailabilityCell& c : cells) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%.6g,%llu,%llu,%u,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%llu\n",
                  c.ratio, static_cast<unsigned long long>(c.flows),
                  static_cast<unsigned long long>(c.pool), c.nics,
                  c.bounds.per_nic_markov, c.bounds.any_exact, c.bounds.any_linear,
                  c.mc.ci.estimate, c.mc.ci.lo, c.mc.ci.hi,
                  static_cast<unsigned long long>(c.mc.trials));
    f << buf;
  }
}

}  // namespace hypernat
