#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace hypernat {

// Simulation clock: integer nanoseconds. Config values are given in
// microseconds (fractions allowed) and converted once at load time, so
// all event arithmetic stays in exact integer math.
using Nanos = int64_t;

constexpr Nanos kNanosPerMicro = 1000;

constexpr Nanos us_to_ns(int64_t us) { return us * kNanosPerMicro; }
constexpr Nanos us_to_ns(int us) { return static_cast<int64_t>(us) * kNanosPerMicro; }

inline Nanos us_to_ns(double us) {
  return static_cast<Nanos>(std::llround(us * 1000.0));
}

inline double ns_to_us(Nanos ns) { return static_cast<double>(ns) / 1000.0; }

// Formats nanoseconds as microseconds with up to three decimals, no
// floating point involved ("125", "333.333").
inline std::string format_us(Nanos ns) {
  bool neg = ns < 0;
  uint64_t v = neg ? static_cast<uint64_t>(-ns) : static_cast<uint64_t>(ns);
  std::string out = std::to_string(v / 1000);
  uint64_t frac = v % 1000;
  if (frac != 0) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), ".%03llu", static_cast<unsigned long long>(frac));
    std::string f(buf);
    while (f.back() == '0') f.pop_back();
    out += f;
  }
  return neg ? "-" + out : out;
}

}  // namespace hypernat
