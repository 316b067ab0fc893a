#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"

namespace hypernat {

// Closed-form overflow bounds for X flows hashed uniformly across N NICs,
// where the shared pool of F external endpoints is split evenly so each
// NIC owns floor(F/N) (plus the spread remainder).
struct OverflowBounds {
  double per_nic_markov = 0;  // Markov bound on one fixed NIC overflowing
  double any_exact = 0;       // union over independent per-NIC bounds
  double any_linear = 0;      // union (Boole) linearization
};

// Throws std::invalid_argument on F <= 0, X < 0, or N == 0.
OverflowBounds overflow_bounds(double flows, double pool, uint32_t nics);

struct WilsonInterval {
  double estimate = 0;
  double lo = 0;
  double hi = 0;
};

// 95% Wilson score interval for a binomial proportion.
WilsonInterval wilson95(uint64_t successes, uint64_t trials);

struct McOverflowResult {
  uint64_t overflows = 0;
  uint64_t trials = 0;
  WilsonInterval ci;  // ci.estimate == overflows / trials
};

// Monte Carlo estimate of P(some NIC receives more flows than its share of
// the pool). Each trial hashes `flows` flows into `nics` bins and checks
// every bin against its capacity floor(pool / nics). Deterministic in
// (flows, pool, nics, trials, seed); trials are seed-schedule independent.
// When flows <= floor(pool / nics) no trial can overflow and the sampling
// loop is skipped.
McOverflowResult mc_overflow(uint64_t flows, uint64_t pool, uint32_t nics,
                             uint64_t trials, uint64_t seed);

struct AvailabilityCell {
  double ratio = 0;  // flows / pool
  uint64_t flows = 0;
  uint64_t pool = 0;
  uint32_t nics = 0;
  OverflowBounds bounds;
  McOverflowResult mc;
};

// Bound-vs-simulation sweep over load ratios 1e-5..1e-1 and 1..max_nics
// NICs. Cell sizes are chosen so each Monte Carlo trial stays cheap.
std::vector<AvailabilityCell> availability_grid(uint32_t max_nics, uint64_t trials,
                                                uint64_t seed);

nlohmann::json availability_json(const std::vector<AvailabilityCell>& cells);
void write_availability_csv(const std::string& path,
                            const std::vector<AvailabilityCell>& cells);

}  // namespace hypernat
