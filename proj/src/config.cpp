#include "hypernat/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace hypernat {

Topology parse_topology(const std::string& s) {
  if (s == "hypernat") return Topology::HyperNat;
  if (s == "onenic") return Topology::OneNic;
  if (s == "servernat") return Topology::ServerNat;
  throw ConfigError("unknown topology: " + s);
}

std::string topology_name(Topology t) {
  switch (t) {
    case Topology::HyperNat: return "hypernat";
    case Topology::OneNic: return "onenic";
    case Topology::ServerNat: return "servernat";
  }
  return "?";
}

namespace {

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": " + v);
  }
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
  uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("bad integer value for " + key + ": " + v);
  return out;
}

Nanos parse_us(const std::string& key, const std::string& v) {
  double us = parse_double(key, v);
  if (us < 0) throw ConfigError(key + " must be non-negative");
  return us_to_ns(us);
}

uint32_t parse_ip_key(const std::string& key, const std::string& v) {
  auto ip = parse_ip(v);
  if (!ip) throw ConfigError("bad IPv4 address for " + key + ": " + v);
  return *ip;
}

}  // namespace

void apply_config_kv(FabricConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "n_nics") cfg.n_nics = static_cast<uint32_t>(parse_u64(key, value));
  else if (key == "hash_seed") cfg.hash_seed = parse_u64(key, value);
  else if (key == "install_mode") {
    if (value == "passive") cfg.install_mode = InstallMode::Passive;
    else if (value == "active") cfg.install_mode = InstallMode::Active;
    else throw ConfigError("install_mode must be passive or active");
  }
  else if (key == "link_us") {
    Nanos v = parse_us(key, value);
    cfg.link_sender_nic = cfg.link_nic_recv = cfg.link_recv_nic = cfg.link_nic_sender = v;
  }
  else if (key == "link_sender_nic_us") cfg.link_sender_nic = parse_us(key, value);
  else if (key == "link_nic_recv_us") cfg.link_nic_recv = parse_us(key, value);
  else if (key == "link_recv_nic_us") cfg.link_recv_nic = parse_us(key, value);
  else if (key == "link_nic_sender_us") cfg.link_nic_sender = parse_us(key, value);
  else if (key == "nic_service_us") cfg.nic_service = parse_us(key, value);
  else if (key == "server_service_us") cfg.server_service = parse_us(key, value);
  else if (key == "rule_create_us") cfg.rule_create = parse_us(key, value);
  else if (key == "coord_hop_us") cfg.coord_hop = parse_us(key, value);
  else if (key == "fetch_lookup_us") cfg.fetch_lookup = parse_us(key, value);
  else if (key == "fetch_service_us") cfg.fetch_service = parse_us(key, value);
  else if (key == "recv_service_us") cfg.recv_service = parse_us(key, value);
  else if (key == "coord_capacity_mps") cfg.coord_capacity_mps = parse_double(key, value);
  else if (key == "queue_cap") cfg.queue_cap = static_cast<uint32_t>(parse_u64(key, value));
  else if (key == "drain_us") cfg.drain = parse_us(key, value);
  else if (key == "sender_rate_pps") cfg.sender_rate_pps = parse_double(key, value);
  else if (key == "internal_ip") cfg.internal_space.ip_base = parse_ip_key(key, value);
  else if (key == "internal_ips") cfg.internal_space.n_ips = static_cast<uint32_t>(parse_u64(key, value));
  else if (key == "internal_port_lo") cfg.internal_space.port_lo = static_cast<uint16_t>(parse_u64(key, value));
  else if (key == "internal_port_hi") cfg.internal_space.port_hi = static_cast<uint16_t>(parse_u64(key, value));
  else if (key == "external_ip") cfg.external_space.ip_base = parse_ip_key(key, value);
  else if (key == "external_ips") cfg.external_space.n_ips = static_cast<uint32_t>(parse_u64(key, value));
  else if (key == "external_port_lo") cfg.external_space.port_lo = static_cast<uint16_t>(parse_u64(key, value));
  else if (key == "external_port_hi") cfg.external_space.port_hi = static_cast<uint16_t>(parse_u64(key, value));
  else if (key == "remote_ip") cfg.remote_space.ip_base = parse_ip_key(key, value);
  else if (key == "remote_ips") cfg.remote_space.n_ips = static_cast<uint32_t>(parse_u64(key, value));
  else if (key == "remote_port_lo") cfg.remote_space.port_lo = static_cast<uint16_t>(parse_u64(key, value));
  else if (key == "remote_port_hi") cfg.remote_space.port_hi = static_cast<uint16_t>(parse_u64(key, value));
  else throw ConfigError("unknown config key: " + key);
}

FabricConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  FabricConfig cfg;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    apply_config_kv(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

void FabricConfig::validate() const {
  if (n_nics < 1) throw ConfigError("n_nics must be >= 1");
  auto check_space = [](const char* name, const EndpointRange& r) {
    if (r.n_ips == 0 || r.port_lo > r.port_hi)
      throw ConfigError(std::string(name) + " space is empty");
  };
  check_space("internal", internal_space);
  check_space("external", external_space);
  check_space("remote", remote_space);
  if (external_space.size() < n_nics)
    throw ConfigError("external space smaller than NIC count");
  if (nic_service <= 0 || server_service <= 0)
    throw ConfigError("service times must be positive");
  if (rule_create <= 0) throw ConfigError("rule_create_us must be positive");
  if (sender_rate_pps <= 0) throw ConfigError("sender_rate_pps must be positive");
}

nlohmann::json FabricConfig::to_json() const {
  auto space_json = [](const EndpointRange& r) {
    return nlohmann::json{{"ip_base", format_ip(r.ip_base)},
                          {"n_ips", r.n_ips},
                          {"port_lo", r.port_lo},
                          {"port_hi", r.port_hi},
                          {"size", r.size()}};
  };
  return nlohmann::json{
      {"n_nics", n_nics},
      {"hash_seed", hash_seed},
      {"install_mode", install_mode == InstallMode::Passive ? "passive" : "active"},
      {"link_sender_nic_us", ns_to_us(link_sender_nic)},
      {"link_nic_recv_us", ns_to_us(link_nic_recv)},
      {"link_recv_nic_us", ns_to_us(link_recv_nic)},
      {"link_nic_sender_us", ns_to_us(link_nic_sender)},
      {"nic_service_us", ns_to_us(nic_service)},
      {"server_service_us", ns_to_us(server_service)},
      {"rule_create_us", ns_to_us(rule_create)},
      {"coord_hop_us", ns_to_us(coord_hop)},
      {"fetch_lookup_us", ns_to_us(fetch_lookup)},
      {"fetch_service_us", ns_to_us(fetch_service)},
      {"recv_service_us", ns_to_us(recv_service)},
      {"coord_capacity_mps", coord_capacity_mps},
      {"queue_cap", queue_cap},
      {"drain_us", ns_to_us(drain)},
      {"sender_rate_pps", sender_rate_pps},
      {"internal_space", space_json(internal_space)},
      {"external_space", space_json(external_space)},
      {"remote_space", space_json(remote_space)},
  };
}

}  // namespace hypernat
