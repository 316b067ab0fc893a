#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace hypernat {

// One transport endpoint: IPv4 address + port, both host byte order.
struct Endpoint {
  uint32_t ip = 0;
  uint16_t port = 0;

  auto operator<=>(const Endpoint&) const = default;

  // Canonical order key: ip major, port minor. Matches the byte order of
  // the canonical wire encoding, so sorting endpoints and sorting their
  // encodings agree.
  uint64_t index() const { return (static_cast<uint64_t>(ip) << 16) | port; }
};

enum class Proto : uint8_t { Tcp = 6, Udp = 17 };

// Connection identity as seen on the wire.
struct FiveTuple {
  Endpoint src;
  Endpoint dst;
  uint8_t proto = 17;

  auto operator<=>(const FiveTuple&) const = default;

  FiveTuple swapped() const { return FiveTuple{dst, src, proto}; }
};

inline std::string format_ip(uint32_t ip) {
  return std::to_string((ip >> 24) & 0xff) + "." + std::to_string((ip >> 16) & 0xff) +
         "." + std::to_string((ip >> 8) & 0xff) + "." + std::to_string(ip & 0xff);
}

inline std::optional<uint32_t> parse_ip(const std::string& s) {
  uint32_t ip = 0;
  int octet = -1, count = 0;
  for (char c : s) {
    if (c >= '0' && c <= '9') {
      octet = (octet < 0 ? 0 : octet) * 10 + (c - '0');
      if (octet > 255) return std::nullopt;
    } else if (c == '.') {
      if (octet < 0 || count == 3) return std::nullopt;
      ip = (ip << 8) | static_cast<uint32_t>(octet);
      octet = -1;
      ++count;
    } else {
      return std::nullopt;
    }
  }
  if (octet < 0 || count != 3) return std::nullopt;
  return (ip << 8) | static_cast<uint32_t>(octet);
}

inline std::string format_endpoint(const Endpoint& e) {
  return format_ip(e.ip) + ":" + std::to_string(e.port);
}

}  // namespace hypernat
