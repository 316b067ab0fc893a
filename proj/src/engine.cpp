#include "hypernat/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "hypernat/hashing.hpp"

namespace hypernat {

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::ArriveAtSwitch: return "ArriveAtSwitch";
    case EventKind::ArriveAtNic: return "ArriveAtNic";
    case EventKind::NicServiceDone: return "NicServiceDone";
    case EventKind::RuleMsgDelivery: return "RuleMsgDelivery";
    case EventKind::ArriveAtReceiver: return "ArriveAtReceiver";
    case EventKind::ReceiverEcho: return "ReceiverEcho";
    case EventKind::ReturnToSender: return "ReturnToSender";
  }
  return "?";
}

namespace {

struct Event {
  Nanos t = 0;
  uint64_t seq = 0;  // tie break: scheduling order
  EventKind kind = EventKind::ArriveAtSwitch;
  int64_t pkt = -1;
  uint32_t nic = 0;
  Direction dir = Direction::Outgoing;
  int64_t msg = -1;  // index into message store
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t != b.t) return a.t > b.t;
    return a.seq > b.seq;
  }
};

// One emulated NAT element: protocol state plus two FIFO single-server
// queues, one per packet direction. busy_until implements the queue; a
// job admitted at t starts at max(t, busy_until).
struct Element {
  NicState nic;
  Nanos out_busy = 0;
  Nanos in_busy = 0;
  uint32_t out_q = 0;  // admitted, not yet completed
  uint32_t in_q = 0;
  Nanos out_occupied = 0;
  Nanos in_occupied = 0;

  Element(uint32_t id, const SubspacePlan& plan, InstallMode mode, HashConfig hash)
      : nic(id, plan, mode, hash) {}
};

class Engine {
 public:
  Engine(const FabricConfig& cfg, const std::vector<TraceRecord>& trace,
         Topology topo, const RunOptions& opts)
      : cfg_(cfg), trace_(trace), topo_(topo), opts_(opts),
        n_elements_(topo == Topology::HyperNat ? cfg.n_nics : 1),
        plan_(SubspacePlan::partition(cfg.external_space, n_elements_)),
        hash_{cfg.hash_seed, n_elements_},
        coord_(n_elements_, cfg.coord_hop, cfg.coord_capacity_mps) {
    elements_.reserve(n_elements_);
    for (uint32_t i = 1; i <= n_elements_; ++i)
      elements_.emplace_back(i, plan_, cfg.install_mode, hash_);
    data_service_ = topo == Topology::ServerNat ? cfg.server_service : cfg.nic_service;
    rule_create_ = cfg.rule_create;
    fetch_lookup_ = cfg.fetch_lookup;
    fetch_service_ = cfg.fetch_service;
    recv_service_ = cfg.recv_service;
    link_sn_ = cfg.link_sender_nic;
    link_nr_ = cfg.link_nic_recv;
    link_rn_ = cfg.link_recv_nic;
    link_ns_ = cfg.link_nic_sender;

    if (!opts_.events_path.empty()) {
      events_file_.open(opts_.events_path, std::ios::binary);
      if (!events_file_) throw std::runtime_error("cannot open " + opts_.events_path);
      events_file_ << "pkt_seq,flow_id,event,kind,t_us\n";
    }
  }

  RunResult take() { return std::move(result_); }

  void run_loop() {
    result_.packets.reserve(trace_.size());
    uint64_t max_flow = 0;
    for (const TraceRecord& r : trace_) {
      Packet p;
      p.seq = result_.packets.size();
      p.flow_id = r.flow_id;
      p.tuple = r.tuple;
      p.size_bytes = r.size_bytes;
      result_.packets.push_back(p);
      max_flow = std::max(max_flow, r.flow_id);
    }
    result_.n_flows = max_flow;

    Nanos trace_end = trace_.empty() ? 0 : trace_.back().t;
    horizon_ = opts_.horizon_override >= 0 ? opts_.horizon_override : trace_end + cfg_.drain;
    result_.horizon = horizon_;
    result_.first_send = trace_.empty() ? 0 : trace_.front().t;

    // Arrivals are chained (each schedules its successor) so the heap stays
    // small even for multi-million-packet traces.
    if (!trace_.empty()) schedule(trace_[0].t, EventKind::ArriveAtSwitch, 0, 0);

    while (!queue_.empty()) {
      Event ev = queue_.top();
      if (ev.t > horizon_) break;
      queue_.pop();
      result_.last_event = ev.t;
      log(ev);
      dispatch(ev);
    }

    finalize();
  }

 private:
  void schedule(Nanos t, EventKind kind, int64_t pkt, uint32_t nic,
                Direction dir = Direction::Outgoing, int64_t msg = -1) {
    queue_.push(Event{t, next_seq_++, kind, pkt, nic, dir, msg});
  }

  void log(const Event& ev) {
    if (!opts_.collect_events && !events_file_.is_open()) return;
    int64_t pkt = ev.kind == EventKind::RuleMsgDelivery ? -1 : ev.pkt;
    uint64_t flow = pkt >= 0 ? result_.packets[pkt].flow_id : 0;
    if (opts_.collect_events)
      result_.events.push_back(EventRow{ordinal_, pkt, flow, ev.kind, ev.t});
    if (events_file_.is_open()) {
      char buf[160];
      int n = std::snprintf(buf, sizeof buf, "%lld,%llu,%llu,%s,%s\n",
                            static_cast<long long>(pkt),
                            static_cast<unsigned long long>(flow),
                            static_cast<unsigned long long>(ordinal_),
                            event_kind_name(ev.kind), format_us(ev.t).c_str());
      events_file_.write(buf, n);
    }
    ++ordinal_;
  }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case EventKind::ArriveAtSwitch: on_send(ev); break;
      case EventKind::ArriveAtNic:
        if (ev.dir == Direction::Outgoing) on_nic_out(ev);
        else on_nic_in(ev);
        break;
      case EventKind::NicServiceDone:
        if (ev.dir == Direction::Outgoing) on_done_out(ev);
        else on_done_in(ev);
        break;
      case EventKind::RuleMsgDelivery: on_msg(ev); break;
      case EventKind::ArriveAtReceiver: on_receiver(ev); break;
      case EventKind::ReceiverEcho: on_echo(ev); break;
      case EventKind::ReturnToSender: on_return(ev); break;
    }
  }

  uint32_t dispatch_out(const FiveTuple& t) const {
    return topo_ == Topology::HyperNat ? assign_nic(t, hash_) : 1;
  }
  uint32_t dispatch_in(const FiveTuple& t) const {
    return topo_ == Topology::HyperNat ? assign_nic(t, hash_) : 1;
  }
  Element& el(uint32_t id) { return elements_[id - 1]; }

  void on_send(const Event& ev) {
    Packet& p = result_.packets[ev.pkt];
    p.stamp(PacketEvent::Sent, ev.t);
    ++result_.emitted;
    uint32_t nic = dispatch_out(p.tuple);
    schedule(ev.t + link_sn_, EventKind::ArriveAtNic, ev.pkt, nic, Direction::Outgoing);
    size_t next = static_cast<size_t>(ev.pkt) + 1;
    if (next < trace_.size())
      schedule(trace_[next].t, EventKind::ArriveAtSwitch, static_cast<int64_t>(next), 0);
  }

  void drop(Packet& p) { p.state = PacketState::Dropped; }

  void on_nic_out(const Event& ev) {
    Packet& p = result_.packets[ev.pkt];
    p.stamp(PacketEvent::ArriveNicOut, ev.t);
    Element& e = el(ev.nic);
    if (cfg_.queue_cap > 0 && e.out_q >= cfg_.queue_cap) {
      ++e.nic.counters().drops_qfull;
      drop(p);
      return;
    }
    OutgoingResult res = e.nic.on_outgoing(p.tuple);
    if (res.kind == OutgoingResult::Kind::DropExhausted) {
      drop(p);
      return;
    }
    // Table updates are instantaneous at arrival; service time only delays
    // the packet. A miss replaces data service with the slow-path build.
    Nanos dur = res.kind == OutgoingResult::Kind::Created ? rule_create_ : data_service_;
    Nanos start = std::max(ev.t, e.out_busy);
    Nanos done = start + dur;
    e.out_busy = done;
    e.out_occupied += dur;
    ++e.out_q;
    Nanos ready = res.kind == OutgoingResult::Kind::Created ? done : ev.t;
    p.stamp(PacketEvent::RuleReadyOut, ready);
    int64_t msg = -1;
    if (res.push) {
      msgs_.push_back(*res.push);
      msg = static_cast<int64_t>(msgs_.size()) - 1;
    }
    schedule(done, EventKind::NicServiceDone, ev.pkt, ev.nic, Direction::Outgoing, msg);
  }

  void on_done_out(const Event& ev) {
    Packet& p = result_.packets[ev.pkt];
    Element& e = el(ev.nic);
    --e.out_q;
    if (ev.msg >= 0) route_msg(ev.t, ev.msg);  // active-mode clone leaves with the build
    const NatRule* rule = e.nic.table().find_forward(
        ForwardKey{p.tuple.src, p.tuple.dst, p.tuple.proto});
    if (rule == nullptr || !NicState::translate(*rule, p)) {
      ++e.nic.counters().drops_unknown;
      drop(p);
      return;
    }
    ++e.nic.counters().translated_out;
    observe_out(p.flow_id, rule->external);
    schedule(ev.t + link_nr_, EventKind::ArriveAtReceiver, ev.pkt, 0);
  }

  void on_receiver(const Event& ev) {
    Packet& p = result_.packets[ev.pkt];
    p.stamp(PacketEvent::ArriveReceiver, ev.t);
    schedule(ev.t + recv_service_, EventKind::ReceiverEcho, ev.pkt, 0);
  }

  void on_echo(const Event& ev) {
    Packet& p = result_.packets[ev.pkt];
    p.stamp(PacketEvent::EchoSent, ev.t);
    p.dir = Direction::Incoming;
    p.tuple = p.tuple.swapped();
    uint32_t nic = dispatch_in(p.tuple);
    schedule(ev.t + link_rn_, EventKind::ArriveAtNic, ev.pkt, nic, Direction::Incoming);
  }

  void on_nic_in(const Event& ev) {
    Packet& p = result_.packets[ev.pkt];
    p.stamp(PacketEvent::ArriveNicIn, ev.t);
    Element& e = el(ev.nic);
    if (cfg_.queue_cap > 0 && e.in_q >= cfg_.queue_cap) {
      ++e.nic.counters().drops_qfull;
      drop(p);
      return;
    }
    IncomingResult res = e.nic.on_incoming(p.tuple, p.seq);
    switch (res.kind) {
      case IncomingResult::Kind::Hit: {
        p.stamp(PacketEvent::RuleReadyIn, ev.t);
        Nanos start = std::max(ev.t, e.in_busy);
        Nanos done = start + data_service_;
        e.in_busy = done;
        e.in_occupied += data_service_;
        ++e.in_q;
        schedule(done, EventKind::NicServiceDone, ev.pkt, ev.nic, Direction::Incoming);
        break;
      }
      case IncomingResult::Kind::FetchIssued: {
        RuleMessage msg = *res.fetch;
        auto owner = plan_.owner_of(p.tuple.dst);
        if (!owner) {
          // Destination outside the shared pool: nothing to fetch from.
          MessageResult mr = e.nic.on_rule_message(
              RuleMessage{RuleMsgKind::FetchMiss, 0, e.nic.id(), {}, msg.key});
          drop_flushed(mr.flushed);
          break;
        }
        msg.to_nic = *owner;
        msgs_.push_back(msg);
        route_msg(ev.t, static_cast<int64_t>(msgs_.size()) - 1);
        break;
      }
      case IncomingResult::Kind::FetchPending:
        break;  // parked behind the outstanding fetch
      case IncomingResult::Kind::DropActiveMiss:
        drop(p);
        break;
    }
  }

  void on_done_in(const Event& ev) {
    Packet& p = result_.packets[ev.pkt];
    Element& e = el(ev.nic);
    --e.in_q;
    const NatRule* rule = e.nic.table().find_reverse(
        ReverseKey{p.tuple.src, p.tuple.dst, p.tuple.proto});
    if (rule == nullptr) {
      ++e.nic.counters().drops_unknown;
      drop(p);
      return;
    }
    observe_in(p.flow_id, rule->external);
    if (!NicState::translate(*rule, p)) {
      ++e.nic.counters().drops_unknown;
      drop(p);
      return;
    }
    ++e.nic.counters().translated_in;
    schedule(ev.t + link_ns_, EventKind::ReturnToSender, ev.pkt, 0);
  }

  void on_return(const Event& ev) {
    Packet& p = result_.packets[ev.pkt];
    p.stamp(PacketEvent::Returned, ev.t);
    p.state = PacketState::Returned;
    ++result_.returned;
    if (ev.t >= opts_.measure_from) ++result_.returned_measured;
    result_.rtt.push_back(ev.t - p.at(PacketEvent::Sent));
  }

  void route_msg(Nanos now, int64_t msg_idx) {
    auto delivery = coord_.route(now, msgs_[msg_idx]);
    if (!delivery) return;
    schedule(*delivery, EventKind::RuleMsgDelivery, -1, msgs_[msg_idx].to_nic,
             Direction::Outgoing, msg_idx);
  }

  void on_msg(const Event& ev) {
    Element& e = el(ev.nic);
    const RuleMessage& msg = msgs_[ev.msg];
    MessageResult res = e.nic.on_rule_message(msg);
    switch (msg.kind) {
      case RuleMsgKind::FetchRequest: {
        // Owner-side lookup: occupancy on the incoming-direction server,
        // reply leaves after the (longer) table walk latency.
        Nanos occ_start = std::max(ev.t, e.in_busy);
        e.in_busy = occ_start + fetch_service_;
        e.in_occupied += fetch_service_;
        if (res.reply) {
          msgs_.push_back(*res.reply);
          route_msg(ev.t + fetch_lookup_, static_cast<int64_t>(msgs_.size()) - 1);
        }
        break;
      }
      case RuleMsgKind::Install:
      case RuleMsgKind::FetchReply: {
        // Install occupancy, then flush parked packets in arrival order.
        // First flushed packet departs at the later of delivery and the
        // server becoming free; the rest pipeline one service apart.
        Nanos base = std::max(ev.t, e.in_busy);
        size_t k = 0;
        for (uint64_t seq : res.flushed) {
          Packet& p = result_.packets[seq];
          p.stamp(PacketEvent::RuleReadyIn, ev.t);
          Nanos done = base + static_cast<Nanos>(k) * data_service_;
          ++e.in_q;
          e.in_occupied += data_service_;
          schedule(done, EventKind::NicServiceDone, static_cast<int64_t>(seq), ev.nic,
                   Direction::Incoming);
          ++k;
        }
        Nanos flush_end = res.flushed.empty()
                              ? base
                              : base + static_cast<Nanos>(res.flushed.size() - 1) * data_service_;
        e.in_busy = flush_end + fetch_service_;
        e.in_occupied += fetch_service_;
        break;
      }
      case RuleMsgKind::FetchMiss:
        drop_flushed(res.flushed);
        break;
    }
  }

  void drop_flushed(const std::vector<uint64_t>& seqs) {
    for (uint64_t seq : seqs) drop(result_.packets[seq]);
  }

  // Two-direction consistency bookkeeping: each flow must be seen under a
  // single external endpoint on both directions, and no endpoint may serve
  // two flows.
  void observe_out(uint64_t flow, Endpoint ext) { observe(flow, ext); }
  void observe_in(uint64_t flow, Endpoint ext) { observe(flow, ext); }
  void observe(uint64_t flow, Endpoint ext) {
    auto [it, fresh] = flow_ext_.try_emplace(flow, ext);
    if (!fresh && !(it->second == ext)) ++result_.tdc_violations;
    auto [oit, ofresh] = ext_flow_.try_emplace(ext.index(), flow);
    if (!ofresh && oit->second != flow) ++result_.tdc_violations;
  }

  void finalize() {
    // Cross-table agreement: a connection cloned to several NICs must be
    // byte-identical everywhere, and every external endpoint must lie in
    // its owner's subspace. Keyed by the full key, not its hash: hash
    // collisions between distinct connections are not violations.
    std::unordered_map<ForwardKey, NatRule, KeyHash> global;
    for (Element& e : elements_) {
      for (const auto& [key, rule] : e.nic.table().forward_map()) {
        auto [it, fresh] = global.try_emplace(key, rule);
        if (!fresh && !(it->second == rule)) ++result_.tdc_violations;
        auto owner = plan_.owner_of(rule.external);
        if (!owner || *owner != rule.owner_nic) ++result_.tdc_violations;
      }
    }
    result_.tdc_pass = result_.tdc_violations == 0;

    result_.per_nic.resize(elements_.size());
    for (size_t i = 0; i < elements_.size(); ++i) {
      Element& e = elements_[i];
      PerNicStats& s = result_.per_nic[i];
      s.counters = e.nic.counters();
      s.out_busy = e.out_occupied;
      s.in_busy = e.in_occupied;
      s.table_size = e.nic.table().size();
      s.pending_keys = e.nic.pending_keys();
      uint32_t id = static_cast<uint32_t>(i) + 1;
      s.subspace_begin = plan_.begin_index(id);
      s.subspace_end = plan_.end_index(id);
      s.subspace_first = format_endpoint(plan_.first_endpoint(id));
      s.allocated = e.nic.allocator().allocated();
      result_.drops_exhausted += s.counters.drops_exhausted;
      result_.drops_unknown += s.counters.drops_unknown;
      result_.drops_qfull += s.counters.drops_qfull;
      result_.translated_total += s.counters.translated_out + s.counters.translated_in;
    }
    result_.flow_external = std::move(flow_ext_);
    result_.coord_forwarded = coord_.messages_forwarded();
    result_.coord_unknown = coord_.unknown_target_drops();
    result_.not_emitted = trace_.size() - result_.emitted;
    result_.in_flight = result_.emitted - result_.returned - result_.drops_exhausted -
                        result_.drops_unknown - result_.drops_qfull;
  }

  const FabricConfig& cfg_;
  const std::vector<TraceRecord>& trace_;
  Topology topo_;
  RunOptions opts_;
  uint32_t n_elements_;
  SubspacePlan plan_;
  HashConfig hash_;
  Coordinator coord_;
  std::vector<Element> elements_;
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::deque<RuleMessage> msgs_;
  uint64_t next_seq_ = 0;
  uint64_t ordinal_ = 0;
  Nanos horizon_ = 0;
  Nanos data_service_ = 0, rule_create_ = 0, fetch_lookup_ = 0, fetch_service_ = 0;
  Nanos recv_service_ = 0, link_sn_ = 0, link_nr_ = 0, link_rn_ = 0, link_ns_ = 0;
  std::unordered_map<uint64_t, Endpoint> flow_ext_;
  std::unordered_map<uint64_t, uint64_t> ext_flow_;
  std::ofstream events_file_;
  RunResult result_;
};

}  // namespace

RunResult run(const FabricConfig& cfg, const std::vector<TraceRecord>& trace,
              Topology topo, const RunOptions& opts) {
  cfg.validate();
  Engine eng(cfg, trace, topo, opts);
  eng.run_loop();
  return eng.take();
}

SaturateResult saturate(const FabricConfig& cfg, Topology topo, double offered_pps,
                        const SaturateParams& params) {
  if (offered_pps <= 0) throw ConfigError("offered rate must be positive");
  if (params.flows == 0) throw ConfigError("flows must be positive");
  if (params.warmup < 0 || params.window <= 0)
    throw ConfigError("warmup/window must be non-negative/positive");
  FabricConfig c = cfg;
  if (c.queue_cap == 0) c.queue_cap = 4096;
  Nanos duration = params.warmup + params.window;
  uint64_t total = static_cast<uint64_t>(
                       std::ceil(offered_pps * (static_cast<double>(duration) / 1e9))) +
                   1;
  uint64_t ppf = (total + params.flows - 1) / params.flows;
  std::vector<TraceRecord> trace = gen_trace(c, params.flows, ppf, offered_pps, params.seed);
  RunOptions opts;
  opts.horizon_override = duration;
  opts.measure_from = params.warmup;
  SaturateResult out;
  out.run = run(c, trace, topo, opts);
  out.returned_in_window = out.run.returned_measured;
  out.measured_pps = static_cast<double>(out.returned_in_window) * 1e9 /
                     static_cast<double>(params.window);
  return out;
}

}  // namespace hypernat
