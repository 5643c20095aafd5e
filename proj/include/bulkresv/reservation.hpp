#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bulkresv/step_function.hpp"

namespace bulkresv {

using SiteId = int;
using RequestId = std::uint64_t;

/// Rate slack for pointwise feasibility checks (d <= C_r).
inline constexpr Rate kFeasibilityTolerance = 1e-9;
/// Slack on the reserved-volume equality.
inline constexpr Volume kVolumeTolerance = 1e-9;

/// Bulk transfer request: move `volume` from source to dest within
/// [arrival, deadline) at no more than `max_rate`.
struct Request {
  RequestId id = 0;
  SiteId source = 0;
  SiteId dest = 0;
  Volume volume = 0.0;
  Seconds arrival = 0.0;
  Seconds deadline = 0.0;
  Rate max_rate = 0.0;

  /// Rate that finishes exactly at the deadline.
  Rate min_rate() const { return volume / (deadline - arrival); }
  /// volume <= max_rate * (deadline - arrival), up to rounding.
  bool window_feasible() const;

  friend bool operator==(const Request&, const Request&) = default;
};

/// Throws std::invalid_argument when volume, window or max_rate is not positive.
void validate(const Request& r);

class Decision {
 public:
  static Decision reject() { return Decision(); }
  static Decision accept(StepFunction reservation);

  bool accepted() const { return !reservation_.is_zero(); }
  const StepFunction& reservation() const { return reservation_; }

  /// Last breakpoint of the reservation; requires accepted().
  Seconds completion_time() const { return reservation_.last_time(); }
  Seconds flow_time(const Request& r) const { return completion_time() - r.arrival; }
  std::size_t interval_count() const { return positive_piece_count(reservation_); }

  friend bool operator==(const Decision&, const Decision&) = default;

 private:
  Decision() = default;
  explicit Decision(StepFunction f) : reservation_(std::move(f)) {}

  StepFunction reservation_;
};

enum class RateRule { MinRate, MaxRate };

struct FixTimeFixRate {
  RateRule rule = RateRule::MinRate;
  friend bool operator==(const FixTimeFixRate&, const FixTimeFixRate&) = default;
};

struct ThresholdFixTimeFlexRate {
  double theta = 0.2;
  friend bool operator==(const ThresholdFixTimeFlexRate&, const ThresholdFixTimeFlexRate&) = default;
};

struct FlexTimeFlexRate {
  friend bool operator==(const FlexTimeFlexRate&, const FlexTimeFlexRate&) = default;
};

struct MultiInterval {
  friend bool operator==(const MultiInterval&, const MultiInterval&) = default;
};

using SchemeKind = std::variant<FixTimeFixRate, ThresholdFixTimeFlexRate, FlexTimeFlexRate, MultiInterval>;

/// Short names: ftfr-rmin, ftfr-rmax, threshold, flextime, multi-interval.
std::string scheme_name(const SchemeKind& scheme);
/// Accepts the short names; `threshold:<theta>` overrides the threshold.
/// Throws std::invalid_argument on unknown names or theta outside (0, 1].
SchemeKind parse_scheme(std::string_view name, double default_theta = 0.2);

/// Per-path values read at the request's arrival, needed by the threshold scheme.
struct PathSnapshot {
  std::vector<Rate> unreserved_at_arrival;
  std::vector<Rate> capacities;

  Rate min_unreserved() const;
  Rate min_capacity() const;
};

/// max_rate on [arrival, deadline).
StepFunction request_constraint(const Request& r);

/// request_constraint(r) min L_1 min ... min L_k.
StepFunction combined_constraint(const Request& r, std::span<const StepFunction> path_states);

Decision decide_fixtime_fixrate(const Request& r, const StepFunction& constraint, RateRule rule);

Decision decide_threshold_flexrate(const Request& r, const StepFunction& constraint,
                                   Rate min_unreserved_at_arrival, Rate capacity, double theta);

/// Maximal rectangles under a nonnegative constraint restricted to [t0, t1),
/// ordered by start time, then by increasing end.
std::vector<Rectangle> pareto_rectangles(const StepFunction& constraint, Seconds t0, Seconds t1);

/// Greedy-accept, minimize-flow-time single rectangle.
Decision decide_flextime_flexrate(const Request& r, const StepFunction& constraint);

/// Greedy-accept, minimize-flow-time: the constraint itself up to the
/// earliest time the requested volume is covered.
Decision decide_multi_interval(const Request& r, const StepFunction& constraint);

Decision decide(const SchemeKind& scheme, const Request& r, const StepFunction& constraint,
                const PathSnapshot& snapshot);

/// Accept decisions must lie under the constraint, vanish outside the
/// request window, and carry exactly the requested volume.
bool satisfies_constraints(const Decision& d, const Request& r, const StepFunction& constraint);

}  // namespace bulkresv
