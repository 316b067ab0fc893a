#include "hypernat/nic.hpp"

namespace hypernat {

OutgoingResult NicState::on_outgoing(const FiveTuple& t) {
  OutgoingResult res;
  ForwardKey key{t.src, t.dst, t.proto};
  if (const NatRule* hit = table_.find_forward(key)) {
    res.kind = OutgoingResult::Kind::Hit;
    res.rule = *hit;
    return res;
  }

  auto ext = alloc_.allocate();
  if (!ext) {
    res.kind = OutgoingResult::Kind::DropExhausted;
    ++counters_.drops_exhausted;
    return res;
  }

  NatRule rule;
  rule.internal = t.src;
  rule.external = *ext;
  rule.remote = t.dst;
  rule.proto = t.proto;
  rule.owner_nic = id_;
  table_.install(rule);
  ++counters_.rule_creates;

  res.kind = OutgoingResult::Kind::Created;
  res.rule = rule;

  if (mode_ == InstallMode::Active) {
    // The return packet hashes as <remote -> external>; clone the rule
    // ahead of time when that lands on a different NIC.
    FiveTuple ret{rule.remote, rule.external, rule.proto};
    uint32_t j = assign_nic(ret, hash_);
    if (j != id_) {
      RuleMessage push;
      push.kind = RuleMsgKind::Install;
      push.from_nic = id_;
      push.to_nic = j;
      push.rule = rule;
      res.push = push;
    }
  }
  return res;
}

IncomingResult NicState::on_incoming(const FiveTuple& t, uint64_t pkt_seq) {
  IncomingResult res;
  ReverseKey key{t.src, t.dst, t.proto};
  if (const NatRule* hit = table_.find_reverse(key)) {
    res.kind = IncomingResult::Kind::Hit;
    res.rule = *hit;
    return res;
  }

  if (mode_ == InstallMode::Active) {
    res.kind = IncomingResult::Kind::DropActiveMiss;
    ++counters_.drops_unknown;
    return res;
  }

  auto it = pending_.find(key);
  if (it != pending_.end()) {
    it->second.push_back(pkt_seq);
    res.kind = IncomingResult::Kind::FetchPending;
    return res;
  }

  pending_[key].push_back(pkt_seq);
  ++counters_.fetch_requests;
  RuleMessage req;
  req.kind = RuleMsgKind::FetchRequest;
  req.from_nic = id_;
  req.key = key;
  // to_nic is filled by the caller, which knows the subspace plan.
  res.kind = IncomingResult::Kind::FetchIssued;
  res.fetch = req;
  return res;
}

MessageResult NicState::on_rule_message(const RuleMessage& msg) {
  MessageResult res;
  res.kind = msg.kind;
  switch (msg.kind) {
    case RuleMsgKind::Install:
    case RuleMsgKind::FetchReply: {
      res.installed_new = table_.install(msg.rule);
      res.rule = msg.rule;
      if (msg.kind == RuleMsgKind::Install) ++counters_.installs_received;
      auto it = pending_.find(reverse_key(msg.rule));
      if (it != pending_.end()) {
        res.flushed = std::move(it->second);
        pending_.erase(it);
      }
      break;
    }
    case RuleMsgKind::FetchRequest: {
      RuleMessage reply;
      reply.from_nic = id_;
      reply.to_nic = msg.from_nic;
      if (const NatRule* hit = table_.find_reverse(msg.key)) {
        reply.kind = RuleMsgKind::FetchReply;
        reply.rule = *hit;
        ++counters_.fetch_replies;
        res.rule = *hit;
      } else {
        reply.kind = RuleMsgKind::FetchMiss;
        reply.key = msg.key;
        ++counters_.fetch_misses;
      }
      res.reply = reply;
      break;
    }
    case RuleMsgKind::FetchMiss: {
      // The owner does not know the connection: everything parked on this
      // key is undeliverable. The seqs come back so the caller can mark them.
      auto it = pending_.find(msg.key);
      if (it != pending_.end()) {
        res.dropped_pending = it->second.size();
        counters_.drops_unknown += it->second.size();
        res.flushed = std::move(it->second);
        pending_.erase(it);
      }
      break;
    }
  }
  return res;
}

bool NicState::translate(const NatRule& rule, Packet& pkt) {
  if (pkt.dir == Direction::Outgoing) {
    if (pkt.tuple.src != rule.internal || pkt.tuple.dst != rule.remote ||
        pkt.tuple.proto != rule.proto)
      return false;
    pkt.tuple.src = rule.external;
  } else {
    if (pkt.tuple.src != rule.remote || pkt.tuple.dst != rule.external ||
        pkt.tuple.proto != rule.proto)
      return false;
    pkt.tuple.dst = rule.internal;
  }
  return true;
}

}  // namespace hypernat
