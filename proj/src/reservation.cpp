#include "bulkresv/reservation.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace bulkresv {

namespace {

// Relative slack for the window feasibility test: v = Rmax * (dl - a) must
// not be rejected because of rounding in the caller's arithmetic.
constexpr double kWindowSlack = 1e-12;

// Threshold comparisons see link levels built from repeated float
// subtraction, so a level that should equal theta*C may sit a few ulps above.
constexpr Rate kThresholdSlack = 1e-9;

Decision fixed_start(const Request& r, const StepFunction& constraint, Rate rate, bool ends_at_deadline) {
  if (!r.window_feasible() || rate > r.max_rate * (1.0 + kWindowSlack)) return Decision::reject();
  const Seconds end = ends_at_deadline ? r.deadline : r.arrival + r.volume / rate;
  if (end > r.deadline + kTimeEpsilon) return Decision::reject();
  const StepFunction rect = Rectangle{r.arrival, end, rate}.to_function();
  if (!leq(rect, constraint, kFeasibilityTolerance)) return Decision::reject();
  return Decision::accept(rect);
}

}  // namespace

bool Request::window_feasible() const {
  return volume <= max_rate * (deadline - arrival) * (1.0 + kWindowSlack);
}

void validate(const Request& r) {
  if (!(r.volume > 0.0)) throw std::invalid_argument("request volume must be positive");
  if (!(r.deadline > r.arrival)) throw std::invalid_argument("request deadline must follow arrival");
  if (!(r.max_rate > 0.0)) throw std::invalid_argument("request max_rate must be positive");
}

Decision Decision::accept(StepFunction reservation) {
  for (const Level& lv : reservation.levels()) {
    if (lv.value < 0.0) throw std::invalid_argument("reservation must be nonnegative");
  }
  return Decision(std::move(reservation));
}

std::string scheme_name(const SchemeKind& scheme) {
  struct Namer {
    std::string operator()(const FixTimeFixRate& s) const {
      return s.rule == RateRule::MinRate ? "ftfr-rmin" : "ftfr-rmax";
    }
    std::string operator()(const ThresholdFixTimeFlexRate&) const { return "threshold"; }
    std::string operator()(const FlexTimeFlexRate&) const { return "flextime"; }
    std::string operator()(const MultiInterval&) const { return "multi-interval"; }
  };
  return std::visit(Namer{}, scheme);
}

SchemeKind parse_scheme(std::string_view name, double default_theta) {
  if (name == "ftfr-rmin") return FixTimeFixRate{RateRule::MinRate};
  if (name == "ftfr-rmax") return FixTimeFixRate{RateRule::MaxRate};
  if (name == "flextime") return FlexTimeFlexRate{};
  if (name == "multi-interval") return MultiInterval{};
  if (name.starts_with("threshold")) {
    double theta = default_theta;
    if (name.size() > 9) {
      if (name[9] != ':') throw std::invalid_argument("unknown scheme: " + std::string(name));
      const std::string arg(name.substr(10));
      char* end = nullptr;
      theta = std::strtod(arg.c_str(), &end);
      if (arg.empty() || *end != '\0') throw std::invalid_argument("bad threshold: " + arg);
    }
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("threshold theta must lie in (0, 1]");
    return ThresholdFixTimeFlexRate{theta};
  }
  throw std::invalid_argument("unknown scheme: " + std::string(name));
}

Rate PathSnapshot::min_unreserved() const {
  if (unreserved_at_arrival.empty()) return std::numeric_limits<Rate>::infinity();
  return *std::min_element(unreserved_at_arrival.begin(), unreserved_at_arrival.end());
}

Rate PathSnapshot::min_capacity() const {
  if (capacities.empty()) return 0.0;
  return *std::min_element(capacities.begin(), capacities.end());
}

StepFunction request_constraint(const Request& r) {
  return Rectangle{r.arrival, r.deadline, r.max_rate}.to_function();
}

StepFunction combined_constraint(const Request& r, std::span<const StepFunction> path_states) {
  StepFunction c = request_constraint(r);
  for (const StepFunction& link : path_states) c = min(c, link);
  return c;
}

Decision decide_fixtime_fixrate(const Request& r, const StepFunction& constraint, RateRule rule) {
  if (rule == RateRule::MinRate) return fixed_start(r, constraint, r.min_rate(), true);
  return fixed_start(r, constraint, r.max_rate, false);
}

Decision decide_threshold_flexrate(const Request& r, const StepFunction& constraint,
                                   Rate min_unreserved_at_arrival, Rate capacity, double theta) {
  if (min_unreserved_at_arrival > theta * capacity + kThresholdSlack) {
    return fixed_start(r, constraint, r.max_rate, false);
  }
  return fixed_start(r, constraint, r.min_rate(), true);
}

std::vector<Rectangle> pareto_rectangles(const StepFunction& constraint, Seconds t0, Seconds t1) {
  const StepFunction clipped = restrict_to(constraint, t0, t1);
  const auto lv = clipped.levels();
  std::vector<Rectangle> out;
  // A maximal rectangle starts where the level rises. From each such anchor
  // the rate steps down at every new running minimum; each step closes one
  // rectangle, and the walk ends once the rate could extend left past the anchor.
  for (std::size_t i = 0; i < lv.size(); ++i) {
    const Rate left = i == 0 ? 0.0 : lv[i - 1].value;
    if (!(lv[i].value > left)) continue;
    Rate rate = lv[i].value;
    for (std::size_t j = i + 1; j < lv.size(); ++j) {
      if (lv[j].value >= rate) continue;
      out.push_back({lv[i].time, lv[j].time, rate});
      rate = lv[j].value;
      if (rate <= left) break;
    }
  }
  return out;
}

Decision decide_flextime_flexrate(const Request& r, const StepFunction& constraint) {
  if (!r.window_feasible()) return Decision::reject();
  const Rectangle* best = nullptr;
  Seconds best_completion = std::numeric_limits<Seconds>::infinity();
  const auto rects = pareto_rectangles(constraint, r.arrival, r.deadline);
  for (const Rectangle& rect : rects) {
    if (rect.rate * (rect.end - rect.start) < r.volume - 1e-12) continue;
    const Seconds completion = std::min(rect.start + r.volume / rect.rate, rect.end);
    const bool better = completion < best_completion ||
                        (completion == best_completion &&
                         (rect.start < best->start || (rect.start == best->start && rect.rate < best->rate)));
    if (better) {
      best = &rect;
      best_completion = completion;
    }
  }
  if (best == nullptr) return Decision::reject();
  Decision d = Decision::accept(Rectangle{best->start, best_completion, best->rate}.to_function());
  assert(satisfies_constraints(d, r, constraint));
  return d;
}

Decision decide_multi_interval(const Request& r, const StepFunction& constraint) {
  if (!r.window_feasible()) return Decision::reject();
  auto prefix = truncate_at_volume(restrict_to(constraint, r.arrival, r.deadline), r.arrival, r.volume);
  if (!prefix) return Decision::reject();
  Decision d = Decision::accept(std::move(prefix->prefix));
  assert(satisfies_constraints(d, r, constraint));
  return d;
}

Decision decide(const SchemeKind& scheme, const Request& r, const StepFunction& constraint,
                const PathSnapshot& snapshot) {
  struct Dispatch {
    const Request& r;
    const StepFunction& c;
    const PathSnapshot& snap;
    Decision operator()(const FixTimeFixRate& s) const { return decide_fixtime_fixrate(r, c, s.rule); }
    Decision operator()(const ThresholdFixTimeFlexRate& s) const {
      return decide_threshold_flexrate(r, c, snap.min_unreserved(), snap.min_capacity(), s.theta);
    }
    Decision operator()(const FlexTimeFlexRate&) const { return decide_flextime_flexrate(r, c); }
    Decision operator()(const MultiInterval&) const { return decide_multi_interval(r, c); }
  };
  Decision d = std::visit(Dispatch{r, constraint, snapshot}, scheme);
  assert(satisfies_constraints(d, r, constraint));
  return d;
}

bool satisfies_constraints(const Decision& d, const Request& r, const StepFunction& constraint) {
  if (!d.accepted()) return true;
  const StepFunction& f = d.reservation();
  if (!leq(f, constraint, kFeasibilityTolerance)) return false;
  if (!leq(StepFunction{}, f)) return false;
  if (f.first_time() < r.arrival - kTimeEpsilon || f.last_time() > r.deadline + kTimeEpsilon) return false;
  if (f.final_value() != 0.0) return false;
  return std::abs(integrate(f, r.arrival, r.deadline) - r.volume) <= kVolumeTolerance;
}

}  // namespace bulkresv
