#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "hypernat/endpoint.hpp"

namespace hypernat {

// FNV-1a, 64-bit.
constexpr uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr uint64_t fnv1a64(const uint8_t* data, size_t len,
                           uint64_t h = kFnvOffsetBasis) {
  for (size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= kFnvPrime;
  }
  return h;
}

// Fixed 13-byte wire encoding of a five tuple, all fields big-endian:
// src.ip(4) src.port(2) dst.ip(4) dst.port(2) proto(1).
inline std::array<uint8_t, 13> canonical_bytes(const FiveTuple& t) {
  std::array<uint8_t, 13> b{};
  auto put32 = [&](size_t i, uint32_t v) {
    b[i] = static_cast<uint8_t>(v >> 24);
    b[i + 1] = static_cast<uint8_t>(v >> 16);
    b[i + 2] = static_cast<uint8_t>(v >> 8);
    b[i + 3] = static_cast<uint8_t>(v);
  };
  auto put16 = [&](size_t i, uint16_t v) {
    b[i] = static_cast<uint8_t>(v >> 8);
    b[i + 1] = static_cast<uint8_t>(v);
  };
  put32(0, t.src.ip);
  put16(4, t.src.port);
  put32(6, t.dst.ip);
  put16(10, t.dst.port);
  b[12] = t.proto;
  return b;
}

struct HashConfig {
  uint64_t seed = 0;
  uint32_t n_nics = 2;
};

// Hash of (seed || canonical bytes). The seed is folded in as 8 big-endian
// bytes ahead of the tuple so different deployments shuffle differently.
inline uint64_t flow_hash(const FiveTuple& t, uint64_t seed) {
  uint8_t s[8];
  for (int i = 0; i < 8; ++i) s[i] = static_cast<uint8_t>(seed >> (56 - 8 * i));
  uint64_t h = fnv1a64(s, 8);
  auto cb = canonical_bytes(t);
  return fnv1a64(cb.data(), cb.size(), h);
}

// NIC ids are 1-based.
inline uint32_t assign_nic(const FiveTuple& t, const HashConfig& cfg) {
  return static_cast<uint32_t>(1 + flow_hash(t, cfg.seed) % cfg.n_nics);
}

}  // namespace hypernat
