#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bulkresv/reservation.hpp"
#include "bulkresv/step_function.hpp"

namespace bulkresv {

struct LinkId {
  std::size_t value = 0;
  friend auto operator<=>(const LinkId&, const LinkId&) = default;
};

/// Capacity plus the time-indexed unreserved bandwidth of one link.
struct LinkState {
  std::string name;
  Rate capacity = 0.0;
  StepFunction remaining;

  /// capacity * h(t - since)
  static LinkState empty(std::string name, Rate capacity, Seconds since = 0.0);

  friend bool operator==(const LinkState&, const LinkState&) = default;
};

/// remaining <- remaining - d. A decision exceeding the unreserved bandwidth
/// is a scheduler bug and raises std::logic_error.
LinkState commit(LinkState link, const StepFunction& d);

/// Folds breakpoints strictly before `now` into one initial level; values at
/// t >= now are unchanged.
LinkState compact(LinkState link, Seconds now);

/// True when 0 <= remaining <= capacity everywhere (within tolerance).
bool within_capacity(const LinkState& link, Rate tolerance = kFeasibilityTolerance);

class Topology {
 public:
  /// One ingress site (0), one egress site (1), one link on the path.
  static Topology single_link(Rate capacity, Seconds since = 0.0);
  /// n ingress sites 0..n-1 and n egress sites n..2n-1, each with an access
  /// link of the given capacity. The core adds no constraint.
  static Topology star(int n, Rate capacity, Seconds since = 0.0);

  LinkId add_link(LinkState link);
  void add_ingress(SiteId site) { ingress_.push_back(site); }
  void add_egress(SiteId site) { egress_.push_back(site); }
  /// Throws std::invalid_argument on an empty path or unknown link.
  void set_path(SiteId source, SiteId dest, std::vector<LinkId> links);

  /// Throws std::out_of_range when the pair has no path.
  const std::vector<LinkId>& path(SiteId source, SiteId dest) const;

  const std::vector<SiteId>& ingress_sites() const { return ingress_; }
  const std::vector<SiteId>& egress_sites() const { return egress_; }

  std::size_t link_count() const { return links_.size(); }
  LinkState& link(LinkId id) { return links_.at(id.value); }
  const LinkState& link(LinkId id) const { return links_.at(id.value); }
  const std::vector<LinkState>& links() const { return links_; }

  void compact_all(Seconds now);

  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  std::vector<SiteId> ingress_;
  std::vector<SiteId> egress_;
  std::vector<LinkState> links_;
  std::map<std::pair<SiteId, SiteId>, std::vector<LinkId>> paths_;
};

/// Constraint calculation, decision and commit to every path link.
Decision centralized_reserve(Topology& topology, const SchemeKind& scheme, const Request& r);

enum class MessagePhase { Forward, DecisionReply, CommitBack };

const char* phase_name(MessagePhase phase);

/**
 * One hop-by-hop message of the distributed protocol.
 *
 * Forward messages carry the constraint after folding in the sending hop's
 * link, plus the running path minima the threshold scheme needs. The last hop
 * decides; an accept travels back as CommitBack (each hop commits it), a
 * reject as DecisionReply (nothing to commit).
 */
struct ReservationMessage {
  MessagePhase phase = MessagePhase::Forward;
  std::size_t hop = 0;
  LinkId link;
  Request request;
  StepFunction partial_constraint;
  Rate min_unreserved = 0.0;
  Rate min_capacity = 0.0;
  std::optional<Decision> decision;
};

struct DistributedOutcome {
  Decision decision;
  std::vector<ReservationMessage> trace;
};

DistributedOutcome distributed_reserve(Topology& topology, const SchemeKind& scheme, const Request& r);

/// One line per message: phase, hop, link, request id, constraint, decision.
std::string format_trace(const std::vector<ReservationMessage>& trace, const Topology& topology);

}  // namespace bulkresv
