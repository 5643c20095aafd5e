#include "bulkresv/step_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace bulkresv {

std::vector<Level> StepFunction::canonicalize(std::vector<Level> raw) {
  std::vector<Level> out;
  out.reserve(raw.size());
  for (Level lv : raw) {
    if (std::abs(lv.value) < kRateEpsilon) lv.value = 0.0;
    if (!out.empty() && lv.time - out.back().time < kTimeEpsilon) {
      // Sliver piece: the level after the later breakpoint replaces it.
      out.back().value = lv.value;
    } else {
      out.push_back(lv);
    }
    const Rate before = out.size() >= 2 ? out[out.size() - 2].value : 0.0;
    if (std::abs(out.back().value - before) < kRateEpsilon) out.pop_back();
  }
  return out;
}

StepFunction StepFunction::heaviside(Seconds at, Rate scale) {
  return from_levels({{at, scale}});
}

StepFunction StepFunction::from_steps(std::vector<Step> steps) {
  std::stable_sort(steps.begin(), steps.end(),
                   [](const Step& a, const Step& b) { return a.time < b.time; });
  std::vector<Level> levels;
  levels.reserve(steps.size());
  Rate acc = 0.0;
  for (std::size_t i = 0; i < steps.size();) {
    const Seconds t = steps[i].time;
    for (; i < steps.size() && steps[i].time == t; ++i) acc += steps[i].jump;
    levels.push_back({t, acc});
  }
  return StepFunction(canonicalize(std::move(levels)));
}

StepFunction StepFunction::from_levels(std::vector<Level> levels) {
  if (!std::is_sorted(levels.begin(), levels.end(),
                      [](const Level& a, const Level& b) { return a.time < b.time; })) {
    throw std::invalid_argument("StepFunction::from_levels: times must be nondecreasing");
  }
  return StepFunction(canonicalize(std::move(levels)));
}

Rate StepFunction::operator()(Seconds t) const {
  auto it = std::upper_bound(levels_.begin(), levels_.end(), t,
                             [](Seconds x, const Level& lv) { return x < lv.time; });
  return it == levels_.begin() ? 0.0 : std::prev(it)->value;
}

std::vector<Step> StepFunction::steps() const {
  std::vector<Step> out;
  out.reserve(levels_.size());
  Rate prev = 0.0;
  for (const Level& lv : levels_) {
    out.push_back({lv.time, lv.value - prev});
    prev = lv.value;
  }
  return out;
}

StepFunction Rectangle::to_function() const {
  return StepFunction::from_levels({{start, rate}, {end, 0.0}});
}

Rectangle make_rectangle(Seconds start, Seconds end, Rate rate) {
  if (!(end > start) || !(rate > 0.0)) {
    throw std::invalid_argument("rectangle needs end > start and rate > 0");
  }
  return {start, end, rate};
}

StepFunction min(const StepFunction& f, const StepFunction& g) {
  return StepFunction::pointwise(f, g, [](Rate a, Rate b) { return std::min(a, b); });
}

StepFunction max(const StepFunction& f, const StepFunction& g) {
  return StepFunction::pointwise(f, g, [](Rate a, Rate b) { return std::max(a, b); });
}

StepFunction add(const StepFunction& f, const StepFunction& g) {
  return StepFunction::pointwise(f, g, [](Rate a, Rate b) { return a + b; });
}

StepFunction subtract(const StepFunction& f, const StepFunction& g) {
  return StepFunction::pointwise(f, g, [](Rate a, Rate b) { return a - b; });
}

StepFunction negate(const StepFunction& f) { return scale(f, -1.0); }

StepFunction scale(const StepFunction& f, double factor) {
  std::vector<Level> out(f.levels().begin(), f.levels().end());
  for (Level& lv : out) lv.value *= factor;
  return StepFunction::from_levels(std::move(out));
}

bool leq(const StepFunction& f, const StepFunction& g, Rate tolerance) {
  const auto a = f.levels();
  const auto b = g.levels();
  std::size_t i = 0;
  std::size_t j = 0;
  Rate fa = 0.0;
  Rate gb = 0.0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].time < b[j].time)) {
      fa = a[i++].value;
    } else if (i == a.size() || b[j].time < a[i].time) {
      gb = b[j++].value;
    } else {
      fa = a[i++].value;
      gb = b[j++].value;
    }
    if (fa > gb + tolerance) return false;
  }
  return true;
}

Volume integrate(const StepFunction& f, Seconds t0, Seconds t1) {
  const auto lv = f.levels();
  Volume total = 0.0;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    const Seconds s = std::max(lv[i].time, t0);
    const Seconds e = std::min(i + 1 < lv.size() ? lv[i + 1].time : t1, t1);
    if (e > s) total += lv[i].value * (e - s);
  }
  return total;
}

StepFunction restrict_to(const StepFunction& f, Seconds t0, Seconds t1) {
  if (!(t1 > t0)) return {};
  std::vector<Level> out;
  out.push_back({t0, f(t0)});
  for (const Level& lv : f.levels()) {
    if (lv.time > t0 && lv.time < t1) out.push_back(lv);
  }
  out.push_back({t1, 0.0});
  return StepFunction::from_levels(std::move(out));
}

std::optional<VolumePrefix> truncate_at_volume(const StepFunction& f, Seconds t_start, Volume v) {
  constexpr Volume kVolumeSlack = 1e-12;
  const auto lv = f.levels();
  Volume acc = 0.0;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    const Seconds end = i + 1 < lv.size() ? lv[i + 1].time : std::numeric_limits<Seconds>::infinity();
    if (end <= t_start || lv[i].value <= 0.0) continue;
    const Seconds start = std::max(lv[i].time, t_start);
    const Volume capacity = lv[i].value * (end - start);
    if (acc + capacity >= v - kVolumeSlack) {
      const Seconds tau = std::min(start + (v - acc) / lv[i].value, end);
      return VolumePrefix{tau, restrict_to(f, t_start, tau)};
    }
    acc += capacity;
  }
  return std::nullopt;
}

std::size_t positive_piece_count(const StepFunction& f) {
  return static_cast<std::size_t>(
      std::count_if(f.levels().begin(), f.levels().end(), [](const Level& lv) { return lv.value > 0.0; }));
}

std::string to_csv(const StepFunction& f) {
  std::string out;
  char buf[64];
  for (const Step& s : f.steps()) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", s.time, s.jump);
    out += buf;
  }
  return out;
}

StepFunction from_csv(std::string_view text) {
  std::vector<Step> steps;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string line(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("step csv line " + std::to_string(line_no) + ": expected time,jump");
    }
    char* end = nullptr;
    const double t = std::strtod(line.c_str(), &end);
    const bool t_ok = end == line.c_str() + comma;
    const double a = std::strtod(line.c_str() + comma + 1, &end);
    const bool a_ok = end != line.c_str() + comma + 1 && line.find_first_not_of(" \t", end - line.c_str()) == std::string::npos;
    if (!t_ok || !a_ok || !std::isfinite(t) || !std::isfinite(a)) {
      throw std::invalid_argument("step csv line " + std::to_string(line_no) + ": bad number");
    }
    steps.push_back({t, a});
  }
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (!(steps[i].time > steps[i - 1].time)) {
      throw std::invalid_argument("step csv: times must be strictly increasing");
    }
  }
  return StepFunction::from_steps(std::move(steps));
}

std::ostream& operator<<(std::ostream& os, const StepFunction& f) {
  if (f.is_zero()) return os << "f0";
  bool first = true;
  for (const Step& s : f.steps()) {
    if (!first) os << (s.jump < 0 ? " - " : " + ");
    os << (first ? s.jump : std::abs(s.jump)) << "h(t-" << s.time << ")";
    first = false;
  }
  return os;
}

}  // namespace bulkresv
