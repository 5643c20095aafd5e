#include "bulkresv/network.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace bulkresv {

LinkState LinkState::empty(std::string name, Rate capacity, Seconds since) {
  if (!(capacity > 0.0)) throw std::invalid_argument("link capacity must be positive");
  return {std::move(name), capacity, StepFunction::heaviside(since, capacity)};
}

LinkState commit(LinkState link, const StepFunction& d) {
  if (d.is_zero()) return link;
  if (!leq(d, link.remaining, kFeasibilityTolerance)) {
    throw std::logic_error("commit on link " + link.name + " exceeds unreserved bandwidth");
  }
  link.remaining = subtract(link.remaining, d);
  const auto lv = link.remaining.levels();
  if (std::any_of(lv.begin(), lv.end(), [](const Level& l) { return l.value < 0.0; })) {
    link.remaining = max(link.remaining, StepFunction{});
  }
  return link;
}

LinkState compact(LinkState link, Seconds now) {
  const auto lv = link.remaining.levels();
  const auto first_future = std::lower_bound(lv.begin(), lv.end(), now,
                                             [](const Level& l, Seconds t) { return l.time < t; });
  const auto past = static_cast<std::size_t>(first_future - lv.begin());
  if (past <= 1) return link;
  std::vector<Level> kept;
  kept.reserve(lv.size() - past + 1);
  kept.push_back(lv[past - 1]);
  kept.insert(kept.end(), first_future, lv.end());
  link.remaining = StepFunction::from_levels(std::move(kept));
  return link;
}

bool within_capacity(const LinkState& link, Rate tolerance) {
  return std::all_of(link.remaining.levels().begin(), link.remaining.levels().end(), [&](const Level& l) {
    return l.value >= -tolerance && l.value <= link.capacity + tolerance;
  });
}

Topology Topology::single_link(Rate capacity, Seconds since) {
  Topology t;
  t.add_ingress(0);
  t.add_egress(1);
  const LinkId id = t.add_link(LinkState::empty("L0", capacity, since));
  t.set_path(0, 1, {id});
  return t;
}

Topology Topology::star(int n, Rate capacity, Seconds since) {
  if (n < 1) throw std::invalid_argument("star topology needs n >= 1");
  Topology t;
  std::vector<LinkId> in;
  std::vector<LinkId> out;
  for (int i = 0; i < n; ++i) {
    t.add_ingress(i);
    in.push_back(t.add_link(LinkState::empty("I" + std::to_string(i), capacity, since)));
  }
  for (int j = 0; j < n; ++j) {
    t.add_egress(n + j);
    out.push_back(t.add_link(LinkState::empty("E" + std::to_string(j), capacity, since)));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) t.set_path(i, n + j, {in[i], out[j]});
  }
  return t;
}

LinkId Topology::add_link(LinkState link) {
  links_.push_back(std::move(link));
  return LinkId{links_.size() - 1};
}

void Topology::set_path(SiteId source, SiteId dest, std::vector<LinkId> links) {
  if (links.empty()) throw std::invalid_argument("path must contain at least one link");
  for (LinkId id : links) {
    if (id.value >= links_.size()) throw std::invalid_argument("path references unknown link");
  }
  paths_[{source, dest}] = std::move(links);
}

const std::vector<LinkId>& Topology::path(SiteId source, SiteId dest) const {
  auto it = paths_.find({source, dest});
  if (it == paths_.end()) {
    throw std::out_of_range("no path from site " + std::to_string(source) + " to " + std::to_string(dest));
  }
  return it->second;
}

void Topology::compact_all(Seconds now) {
  for (LinkState& l : links_) l = compact(std::move(l), now);
}

Decision centralized_reserve(Topology& topology, const SchemeKind& scheme, const Request& r) {
  const auto& path = topology.path(r.source, r.dest);
  std::vector<StepFunction> states;
  PathSnapshot snapshot;
  states.reserve(path.size());
  for (LinkId id : path) {
    const LinkState& link = topology.link(id);
    states.push_back(link.remaining);
    snapshot.unreserved_at_arrival.push_back(link.remaining(r.arrival));
    snapshot.capacities.push_back(link.capacity);
  }
  const StepFunction constraint = combined_constraint(r, states);
  Decision d = decide(scheme, r, constraint, snapshot);
  if (d.accepted()) {
    // Every commit is checked before any link is touched.
    std::vector<LinkState> updated;
    updated.reserve(path.size());
    for (LinkId id : path) updated.push_back(commit(topology.link(id), d.reservation()));
    for (std::size_t i = 0; i < path.size(); ++i) topology.link(path[i]) = std::move(updated[i]);
  }
  return d;
}

const char* phase_name(MessagePhase phase) {
  switch (phase) {
    case MessagePhase::Forward:
      return "Forward";
    case MessagePhase::DecisionReply:
      return "DecisionReply";
    case MessagePhase::CommitBack:
      return "CommitBack";
  }
  return "?";
}

DistributedOutcome distributed_reserve(Topology& topology, const SchemeKind& scheme, const Request& r) {
  const auto& path = topology.path(r.source, r.dest);
  std::vector<ReservationMessage> trace;
  trace.reserve(2 * path.size());

  StepFunction carried = request_constraint(r);
  Rate min_unreserved = 0.0;
  Rate min_capacity = 0.0;
  for (std::size_t hop = 0; hop < path.size(); ++hop) {
    const LinkState& link = topology.link(path[hop]);
    carried = min(carried, link.remaining);
    const Rate here = link.remaining(r.arrival);
    min_unreserved = hop == 0 ? here : std::min(min_unreserved, here);
    min_capacity = hop == 0 ? link.capacity : std::min(min_capacity, link.capacity);
    trace.push_back({MessagePhase::Forward, hop, path[hop], r, carried, min_unreserved, min_capacity, std::nullopt});
  }

  // The last hop decides; the destination's confirmation always succeeds.
  const PathSnapshot snapshot{{min_unreserved}, {min_capacity}};
  Decision d = decide(scheme, r, carried, snapshot);

  const MessagePhase back = d.accepted() ? MessagePhase::CommitBack : MessagePhase::DecisionReply;
  for (std::size_t k = path.size(); k-- > 0;) {
    LinkState& link = topology.link(path[k]);
    if (d.accepted()) link = commit(std::move(link), d.reservation());
    trace.push_back({back, k, path[k], r, carried, min_unreserved, min_capacity, d});
  }
  return {std::move(d), std::move(trace)};
}

namespace {

std::string inline_steps(const StepFunction& f) {
  if (f.is_zero()) return "0";
  std::string out;
  char buf[64];
  for (const Step& s : f.steps()) {
    std::snprintf(buf, sizeof buf, "%s%.17g:%.17g", out.empty() ? "" : ";", s.time, s.jump);
    out += buf;
  }
  return out;
}

}  // namespace

std::string format_trace(const std::vector<ReservationMessage>& trace, const Topology& topology) {
  std::ostringstream os;
  for (const ReservationMessage& m : trace) {
    os << phase_name(m.phase) << " hop=" << m.hop << " link=" << topology.link(m.link).name
       << " request=" << m.request.id << " constraint=" << inline_steps(m.partial_constraint);
    if (m.decision) {
      os << " decision=" << (m.decision->accepted() ? inline_steps(m.decision->reservation()) : "reject");
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace bulkresv
