#include "hypernat/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hypernat/analytics.hpp"
#include "hypernat/engine.hpp"
#include "hypernat/metrics.hpp"
#include "hypernat/trace.hpp"

namespace hypernat {

namespace {

constexpr const char* kConfigKeyHelp =
    "Override one config key (repeatable). Keys and calibrated defaults:\n"
    "  n_nics=2, hash_seed=0, install_mode=passive|active (passive),\n"
    "  link_us (sets all four links), link_sender_nic_us=100,\n"
    "  link_nic_recv_us=100, link_recv_nic_us=102, link_nic_sender_us=101,\n"
    "  nic_service_us=59 (latency-calibrated; throughput-calibrated 1.382),\n"
    "  server_service_us=0.781, rule_create_us=25, coord_hop_us=400,\n"
    "  fetch_lookup_us=141, fetch_service_us=50, recv_service_us=100,\n"
    "  coord_capacity_mps=0 (unlimited), queue_cap=0 (unbounded),\n"
    "  drain_us=1000000, sender_rate_pps=2000000,\n"
    "  internal_ip=10.0.0.0 internal_ips=256 internal_port_lo=1024 internal_port_hi=65535,\n"
    "  external_ip=203.0.113.0 external_ips=16 external_port_lo=1024 external_port_hi=65535,\n"
    "  remote_ip=198.51.100.0 remote_ips=256 remote_port_lo=1 remote_port_hi=65535";

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
  int64_t nics = -1;  // -1: not given
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--config", c.config_path, "Config file (key=value lines)");
  cmd->add_option("--set", c.sets, kConfigKeyHelp);
  cmd->add_option("--nics", c.nics, "NIC count (hypernat only; shorthand for --set n_nics=N)")
      ->check(CLI::Range(static_cast<int64_t>(1), static_cast<int64_t>(4096)));
}

// Precedence: built-in defaults < --config file < --set (in order) < --nics.
FabricConfig build_config(const CommonOpts& c) {
  FabricConfig cfg;
  if (!c.config_path.empty()) cfg = load_config_file(c.config_path);
  for (const std::string& kv : c.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_config_kv(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.nics >= 0) cfg.n_nics = static_cast<uint32_t>(c.nics);
  return cfg;
}

nlohmann::json command_echo(int argc, const char* const* argv) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < argc; ++i) a.push_back(std::string(argv[i]));
  return a;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << j.dump(2) << '\n';
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

int cmd_simulate(const CLI::App& cmd, const CommonOpts& common, int argc,
                 const char* const* argv, const std::string& topology_s,
                 const std::string& trace_path, const std::string& out_dir,
                 const std::string& report_name, bool emit_events,
                 double saturate_pps, uint64_t sat_flows, double warmup_us,
                 double window_us, uint64_t gen_seed) {
  Topology topo = parse_topology(topology_s);
  FabricConfig cfg = build_config(common);
  if (topo != Topology::HyperNat) {
    if (common.nics > 1) {
      std::cerr << "error: --nics > 1 is only valid with --topology hypernat\n";
      return 1;
    }
    cfg.n_nics = 1;
  }
  cfg.validate();

  bool have_trace = !trace_path.empty();
  bool have_sat = saturate_pps > 0;
  if (have_trace == have_sat) {
    std::cerr << "error: exactly one of --trace and --saturate-pps is required\n";
    return 1;
  }

  std::filesystem::create_directories(out_dir);
  nlohmann::json report;
  if (have_sat) {
    SaturateParams p;
    p.flows = sat_flows;
    p.warmup = us_to_ns(warmup_us);
    p.window = us_to_ns(window_us);
    p.seed = gen_seed;
    SaturateResult sat = saturate(cfg, topo, saturate_pps, p);
    report = build_report(cfg, topo, sat.run);
    report["saturate"] = {{"offered_pps", saturate_pps},
                          {"flows", p.flows},
                          {"warmup_us", format_us(p.warmup)},
                          {"window_us", format_us(p.window)},
                          {"trace_seed", p.seed},
                          {"returned_in_window", sat.returned_in_window},
                          {"measured_pps", sat.measured_pps}};
    std::printf("%s saturate offered=%.0fpps measured=%.1fpps window_returns=%llu tdc=%s\n",
                topology_name(topo).c_str(), saturate_pps, sat.measured_pps,
                static_cast<unsigned long long>(sat.returned_in_window),
                sat.run.tdc_pass ? "pass" : "FAIL");
    write_cdf_csv(join_path(out_dir, "rtt_cdf.csv"), cdf(sat.run.rtt));
  } else {
    std::vector<TraceRecord> trace = load_trace(trace_path, cfg);
    RunOptions opts;
    if (emit_events) opts.events_path = join_path(out_dir, "events.csv");
    RunResult r = run(cfg, trace, topo, opts);
    report = build_report(cfg, topo, r);
    report["trace"] = trace_path;
    RttStats s = rtt_stats(r.rtt);
    std::printf(
        "%s packets=%zu returned=%llu throughput=%.1fpps p50=%sus p99=%sus tdc=%s\n",
        topology_name(topo).c_str(), trace.size(),
        static_cast<unsigned long long>(r.returned),
        report["throughput_pps"].get<double>(), format_us(s.p50).c_str(),
        format_us(s.p99).c_str(), r.tdc_pass ? "pass" : "FAIL");
    write_cdf_csv(join_path(out_dir, "rtt_cdf.csv"), cdf(r.rtt));
  }
  report["command"] = command_echo(argc, argv);
  write_json(join_path(out_dir, report_name), report);
  (void)cmd;
  return 0;
}

int cmd_sweep(const CommonOpts& common, int argc, const char* const* argv,
              const std::string& topologies_s, const std::string& flow_counts_s,
              uint64_t total_packets, double rate_pps, uint64_t seed,
              const std::string& out_dir) {
  // Throughput-calibrated service times; long drain so every packet returns
  // and the measured rate reflects the full makespan.
  CommonOpts withcal = common;
  withcal.sets.insert(withcal.sets.begin(),
                      {"nic_service_us=1.382", "server_service_us=0.781",
                       "drain_us=60000000"});
  FabricConfig cfg = build_config(withcal);
  cfg.validate();

  std::vector<Topology> topos;
  {
    std::stringstream ss(topologies_s);
    std::string tok;
    while (std::getline(ss, tok, ',')) topos.push_back(parse_topology(tok));
  }
  std::vector<uint64_t> sizes;
  {
    std::stringstream ss(flow_counts_s);
    std::string tok;
    while (std::getline(ss, tok, ',')) sizes.push_back(std::stoull(tok));
  }
  if (topos.empty() || sizes.empty()) {
    std::cerr << "error: empty sweep axis\n";
    return 1;
  }
  for (uint64_t f : sizes)
    if (f == 0 || f > total_packets) {
      std::cerr << "error: flow counts must be in [1, total packets]\n";
      return 1;
    }

  std::filesystem::create_directories(out_dir);
  std::ofstream csvf(join_path(out_dir, "sweep.csv"), std::ios::binary);
  if (!csvf) throw std::runtime_error("cannot open sweep.csv");
  csvf << "topology,n_flows,throughput_pps,p50_rtt_us,p99_rtt_us\n";
  nlohmann::json cells = nlohmann::json::array();

  for (uint64_t flows : sizes) {
    uint64_t ppf = total_packets / flows;
    std::vector<TraceRecord> trace = gen_trace(cfg, flows, ppf, rate_pps, seed);
    for (Topology topo : topos) {
      FabricConfig rcfg = cfg;
      if (topo != Topology::HyperNat) rcfg.n_nics = 1;
      RunResult r = run(rcfg, trace, topo);
      RttStats s = rtt_stats(r.rtt);
      Nanos makespan = r.last_event - r.first_send;
      double thr = makespan > 0
                       ? static_cast<double>(r.returned) * 1e9 / static_cast<double>(makespan)
                       : 0.0;
      char row[256];
      std::snprintf(row, sizeof row, "%s,%llu,%.1f,%s,%s\n",
                    topology_name(topo).c_str(),
                    static_cast<unsigned long long>(flows), thr,
                    format_us(s.p50).c_str(), format_us(s.p99).c_str());
      csvf << row;
      std::fputs(row, stdout);
      nlohmann::json cell = build_report(rcfg, topo, r);
      cell["n_flows"] = flows;
      cells.push_back(cell);
    }
  }
  nlohmann::json meta;
  meta["command"] = command_echo(argc, argv);
  meta["config"] = cfg.to_json();
  meta["seed"] = seed;
  meta["total_packets"] = total_packets;
  meta["rate_pps"] = rate_pps;
  meta["cells"] = cells;
  write_json(join_path(out_dir, "sweep_meta.json"), meta);
  return 0;
}

int cmd_gen_trace(const CommonOpts& common, int argc, const char* const* argv,
                  uint64_t flows, uint64_t pkts, double rate_pps, uint64_t seed,
                  const std::string& out_path) {
  FabricConfig cfg = build_config(common);
  double rate = rate_pps > 0 ? rate_pps : cfg.sender_rate_pps;
  std::vector<TraceRecord> trace = gen_trace(cfg, flows, pkts, rate, seed);
  write_trace(out_path, trace);
  nlohmann::json meta;
  meta["command"] = command_echo(argc, argv);
  meta["config"] = cfg.to_json();
  meta["flows"] = flows;
  meta["pkts_per_flow"] = pkts;
  meta["rate_pps"] = rate;
  meta["seed"] = seed;
  meta["records"] = trace.size();
  write_json(out_path + ".meta.json", meta);
  std::printf("wrote %zu records to %s\n", trace.size(), out_path.c_str());
  return 0;
}

int cmd_analyze(int argc, const char* const* argv, uint64_t X, uint64_t F, uint32_t N,
                uint64_t mc_trials, uint64_t seed, const std::string& json_path,
                const std::string& grid_path) {
  OverflowBounds b =
      overflow_bounds(static_cast<double>(X), static_cast<double>(F), N);
  McOverflowResult mc = mc_overflow(X, F, N, mc_trials, seed);
  std::printf("X=%llu F=%llu N=%u\n", static_cast<unsigned long long>(X),
              static_cast<unsigned long long>(F), N);
  std::printf("per_nic_markov=%.9g any_exact=%.9g any_linear=%.9g\n", b.per_nic_markov,
              b.any_exact, b.any_linear);
  std::printf("mc_estimate=%.9g ci95=[%.9g, %.9g] trials=%llu\n", mc.ci.estimate,
              mc.ci.lo, mc.ci.hi, static_cast<unsigned long long>(mc.trials));

  nlohmann::json j;
  j["command"] = command_echo(argc, argv);
  j["X"] = X;
  j["F"] = F;
  j["N"] = N;
  j["seed"] = seed;
  j["per_nic_markov"] = b.per_nic_markov;
  j["any_exact"] = b.any_exact;
  j["any_linear"] = b.any_linear;
  j["mc_estimate"] = mc.ci.estimate;
  j["mc_ci_lo"] = mc.ci.lo;
  j["mc_ci_hi"] = mc.ci.hi;
  j["mc_trials"] = mc.trials;
  if (!json_path.empty()) write_json(json_path, j);
  if (!grid_path.empty()) {
    std::vector<AvailabilityCell> cells = availability_grid(10, mc_trials, seed);
    write_availability_csv(grid_path, cells);
    std::printf("wrote %zu grid cells to %s\n", cells.size(), grid_path.c_str());
  }
  return 0;
}

}  // namespace

int cli_run(int argc, const char* const* argv) {
  CLI::App app{"HyperNAT protocol engine and discrete-event fabric simulator"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Replay a trace (or drive saturation load)");
  CommonOpts sim_common;
  add_common(sim, sim_common);
  std::string topology_s, trace_path, out_dir = ".", report_name = "report.json";
  bool emit_events = false;
  double saturate_pps = 0, warmup_us = 300000, window_us = 300000;
  uint64_t sat_flows = 10000, gen_seed = 1;
  sim->add_option("--topology", topology_s, "hypernat | onenic | servernat")->required();
  sim->add_option("--trace", trace_path, "Input trace CSV");
  sim->add_option("--out-dir", out_dir, "Output directory (default .)");
  sim->add_option("--report", report_name, "Report file name (default report.json)");
  sim->add_flag("--emit-events", emit_events, "Also write events.csv");
  sim->add_option("--saturate-pps", saturate_pps,
                  "Generate sustained offered load instead of replaying a trace");
  sim->add_option("--flows", sat_flows, "Distinct flows for --saturate-pps (default 10000)");
  sim->add_option("--warmup-us", warmup_us, "Saturation warmup (default 300000)");
  sim->add_option("--window-us", window_us, "Saturation measurement window (default 300000)");
  sim->add_option("--gen-seed", gen_seed, "Trace seed for --saturate-pps (default 1)");

  // sweep
  auto* swp = app.add_subcommand("sweep", "Throughput vs flow count across topologies");
  CommonOpts swp_common;
  add_common(swp, swp_common);
  std::string topologies_s = "hypernat,onenic,servernat";
  std::string flow_counts_s = "10000,50000,100000,200000";
  uint64_t total_packets = 1000000, sweep_seed = 1;
  double sweep_rate = 2000000;
  std::string sweep_out = ".";
  swp->add_option("--topologies", topologies_s, "Comma list (default all three)");
  swp->add_option("--flow-counts", flow_counts_s, "Comma list (default 10000,50000,100000,200000)");
  swp->add_option("--total-packets", total_packets, "Packets per cell (default 1000000)")
      ->check(CLI::PositiveNumber);
  swp->add_option("--rate", sweep_rate, "Offered rate pps (default 2000000)")
      ->check(CLI::PositiveNumber);
  swp->add_option("--seed", sweep_seed, "Trace seed (default 1)");
  swp->add_option("--out-dir", sweep_out, "Output directory (default .)");

  // gen-trace
  auto* gen = app.add_subcommand("gen-trace", "Generate a synthetic trace CSV");
  CommonOpts gen_common;
  add_common(gen, gen_common);
  uint64_t gt_flows = 0, gt_pkts = 0, gt_seed = 1;
  double gt_rate = 0;
  std::string gt_out = "trace.csv";
  gen->add_option("--flows", gt_flows, "Distinct flows")->required()->check(CLI::PositiveNumber);
  gen->add_option("--pkts", gt_pkts, "Packets per flow")->required()->check(CLI::PositiveNumber);
  gen->add_option("--rate", gt_rate, "Aggregate send rate pps (default: config sender_rate_pps)");
  gen->add_option("--seed", gt_seed, "RNG seed (default 1)");
  gen->add_option("--out", gt_out, "Output path (default trace.csv)");

  // analyze
  auto* ana = app.add_subcommand("analyze", "Subspace overflow bounds and Monte Carlo check");
  uint64_t ana_X = 0, ana_F = 0, ana_trials = 1000000, ana_seed = 1;
  uint32_t ana_N = 0;
  std::string ana_json, ana_grid;
  ana->add_option("--X", ana_X, "Concurrent flows")->required();
  ana->add_option("--F", ana_F, "External endpoint pool size")->required()
      ->check(CLI::PositiveNumber);
  ana->add_option("--N", ana_N, "NIC count")->required()->check(CLI::PositiveNumber);
  ana->add_option("--mc-trials", ana_trials, "Monte Carlo trials (default 1000000)")
      ->check(CLI::PositiveNumber);
  ana->add_option("--seed", ana_seed, "Monte Carlo seed (default 1)");
  ana->add_option("--json", ana_json, "Write result JSON here");
  ana->add_option("--grid", ana_grid, "Write bound-vs-MC sweep grid CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(*sim, sim_common, argc, argv, topology_s, trace_path, out_dir,
                          report_name, emit_events, saturate_pps, sat_flows, warmup_us,
                          window_us, gen_seed);
    if (swp->parsed())
      return cmd_sweep(swp_common, argc, argv, topologies_s, flow_counts_s, total_packets,
                       sweep_rate, sweep_seed, sweep_out);
    if (gen->parsed())
      return cmd_gen_trace(gen_common, argc, argv, gt_flows, gt_pkts, gt_rate, gt_seed, gt_out);
    if (ana->parsed())
      return cmd_analyze(argc, argv, ana_X, ana_F, ana_N, ana_trials, ana_seed, ana_json,
                         ana_grid);
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const TraceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace hypernat
