#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bulkresv {

using Seconds = double;
using Rate = double;
using Volume = double;

/// Breakpoints closer than this are merged when canonicalizing.
inline constexpr Seconds kTimeEpsilon = 1e-9;
/// Jumps (and levels) smaller than this in magnitude are treated as zero.
inline constexpr Rate kRateEpsilon = 1e-12;

/// One Heaviside term `jump * h(t - time)`.
struct Step {
  Seconds time;
  Rate jump;

  friend bool operator==(const Step&, const Step&) = default;
};

/// The function takes `value` on [time, next breakpoint).
struct Level {
  Seconds time;
  Rate value;

  friend bool operator==(const Level&, const Level&) = default;
};

/**
 * Piecewise-constant time-rate function with finitely many breakpoints.
 *
 * The value is zero before the first breakpoint and constant after the last
 * one. Intervals are half-open, so the value at a breakpoint already includes
 * its jump. Instances are always canonical: breakpoint times are strictly
 * increasing (at least kTimeEpsilon apart) and consecutive levels differ by at
 * least kRateEpsilon, so every stored breakpoint carries a nonzero jump.
 *
 * Storage is by level rather than by jump: min() copies levels exactly and
 * long add/subtract chains do not accumulate error through prefix sums.
 */
class StepFunction {
 public:
  /// The zero function f^0.
  StepFunction() = default;

  /// scale * h(t - at)
  static StepFunction heaviside(Seconds at, Rate scale = 1.0);
  /// Sum of Heaviside terms; input may be unsorted, repeated times are summed.
  static StepFunction from_steps(std::vector<Step> steps);
  /// Levels sorted by nondecreasing time; later entries win on equal times.
  static StepFunction from_levels(std::vector<Level> levels);

  Rate operator()(Seconds t) const;

  std::span<const Level> levels() const { return levels_; }
  std::vector<Step> steps() const;
  std::size_t size() const { return levels_.size(); }
  bool is_zero() const { return levels_.empty(); }

  /// First and last breakpoint; only meaningful when !is_zero().
  Seconds first_time() const { return levels_.front().time; }
  Seconds last_time() const { return levels_.back().time; }
  /// Value after the last breakpoint.
  Rate final_value() const { return levels_.empty() ? 0.0 : levels_.back().value; }

  friend bool operator==(const StepFunction&, const StepFunction&) = default;

  /// op(f(t), g(t)) for every t, in one merge pass over both breakpoint lists.
  template <typename Op>
  static StepFunction pointwise(const StepFunction& f, const StepFunction& g, Op op);

 private:
  explicit StepFunction(std::vector<Level> levels) : levels_(std::move(levels)) {}
  static std::vector<Level> canonicalize(std::vector<Level> raw);

  std::vector<Level> levels_;
};

template <typename Op>
StepFunction StepFunction::pointwise(const StepFunction& f, const StepFunction& g, Op op) {
  const auto& a = f.levels_;
  const auto& b = g.levels_;
  std::vector<Level> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  Rate fa = 0.0;
  Rate gb = 0.0;
  while (i < a.size() || j < b.size()) {
    Seconds t;
    if (j == b.size() || (i < a.size() && a[i].time < b[j].time)) {
      t = a[i].time;
      fa = a[i++].value;
    } else if (i == a.size() || b[j].time < a[i].time) {
      t = b[j].time;
      gb = b[j++].value;
    } else {
      t = a[i].time;
      fa = a[i++].value;
      gb = b[j++].value;
    }
    out.push_back({t, op(fa, gb)});
  }
  return StepFunction(canonicalize(std::move(out)));
}

/// A single constant-rate interval [start, end).
struct Rectangle {
  Seconds start;
  Seconds end;
  Rate rate;

  Volume volume() const { return rate * (end - start); }
  StepFunction to_function() const;

  friend bool operator==(const Rectangle&, const Rectangle&) = default;
};

/// Throws std::invalid_argument unless end > start and rate > 0.
Rectangle make_rectangle(Seconds start, Seconds end, Rate rate);

StepFunction min(const StepFunction& f, const StepFunction& g);
StepFunction max(const StepFunction& f, const StepFunction& g);
StepFunction add(const StepFunction& f, const StepFunction& g);
StepFunction subtract(const StepFunction& f, const StepFunction& g);
StepFunction negate(const StepFunction& f);
StepFunction scale(const StepFunction& f, double factor);

/// f(t) <= g(t) + tolerance for every t.
bool leq(const StepFunction& f, const StepFunction& g, Rate tolerance = 0.0);

/// Exact integral of f over [t0, t1).
Volume integrate(const StepFunction& f, Seconds t0, Seconds t1);

/// f on [t0, t1), zero elsewhere.
StepFunction restrict_to(const StepFunction& f, Seconds t0, Seconds t1);

struct VolumePrefix {
  Seconds tau;
  StepFunction prefix;
};

/// Earliest tau >= t_start with the integral of f over [t_start, tau) equal
/// to v, together with f cut to [t_start, tau). Empty when f cannot supply v.
std::optional<VolumePrefix> truncate_at_volume(const StepFunction& f, Seconds t_start, Volume v);

/// Number of maximal constant-rate pieces with positive value.
std::size_t positive_piece_count(const StepFunction& f);

/// One `time,jump` line per breakpoint, %.17g precision.
std::string to_csv(const StepFunction& f);
/// Inverse of to_csv; throws std::invalid_argument on malformed lines.
StepFunction from_csv(std::string_view text);

std::ostream& operator<<(std::ostream& os, const StepFunction& f);

}  // namespace bulkresv
