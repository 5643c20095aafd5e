#include "bulkresv/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bulkresv {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t warmup_count(double fraction, std::size_t n) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw std::invalid_argument("warmup fraction must lie in [0, 1)");
  return static_cast<std::size_t>(fraction * static_cast<double>(n));
}

}  // namespace

Volume mean_volume(const VolumeDistribution& dist) {
  return std::visit([](const auto& d) -> Volume {
    if constexpr (std::is_same_v<std::decay_t<decltype(d)>, ConstantVolume>) return d.value;
    else return d.mean;
  }, dist);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coordinates) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t c : coordinates) h = splitmix64(h ^ splitmix64(c));
  return h;
}

double Rng::exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

RequestStream::RequestStream(const WorkloadSpec& workload, std::vector<SiteId> sources, std::vector<SiteId> dests)
    : workload_(workload), sources_(std::move(sources)), dests_(std::move(dests)), rng_(workload.seed) {
  if (sources_.empty() || dests_.empty()) throw std::invalid_argument("request stream needs sites");
  if (!(workload_.arrival_rate > 0.0)) throw std::invalid_argument("arrival rate must be positive");
  if (!(workload_.r_min > 0.0 && workload_.r_min <= workload_.r_max)) {
    throw std::invalid_argument("workload needs 0 < r_min <= r_max");
  }
}

Request RequestStream::next() {
  clock_ += rng_.exponential(workload_.arrival_rate);
  Volume v = 0.0;
  if (const auto* c = std::get_if<ConstantVolume>(&workload_.volume)) {
    v = c->value;
    rng_.uniform01();  // keep the draw count independent of the distribution
  } else {
    v = rng_.exponential(1.0 / std::get<ExponentialVolume>(workload_.volume).mean);
  }
  const SiteId src = sources_[rng_.index(sources_.size())];
  const SiteId dst = dests_[rng_.index(dests_.size())];
  return Request{next_id_++, src, dst, v, clock_, clock_ + v / workload_.r_min, workload_.r_max};
}

void Metrics::finalize() {
  blocking_probability = offered ? static_cast<double>(blocked) / static_cast<double>(offered) : 0.0;
  fail_probability = offered ? static_cast<double>(failed) / static_cast<double>(offered) : 0.0;
  mean_flow_time = completed ? flow_time_sum / static_cast<double>(completed) : 0.0;
  mean_intervals_per_flow = accepted && interval_sum > 0.0 ? interval_sum / static_cast<double>(accepted) : 0.0;
}

double ReplicationStats::standard_error() const {
  return values.empty() ? 0.0 : stddev / std::sqrt(static_cast<double>(values.size()));
}

ReplicationStats summarize(std::span<const double> values) {
  ReplicationStats s;
  s.values.assign(values.begin(), values.end());
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

Metrics run_reservation_sim(Topology topology, const SchemeKind& scheme, const WorkloadSpec& workload,
                            std::size_t num_arrivals, const SimOptions& options) {
  RequestStream stream(workload, topology.ingress_sites(), topology.egress_sites());
  const std::size_t warmup = warmup_count(options.warmup_fraction, num_arrivals);
  Metrics m;
  for (std::size_t k = 0; k < num_arrivals; ++k) {
    const Request r = stream.next();
    topology.compact_all(r.arrival);
    const Decision d = centralized_reserve(topology, scheme, r);
    if (options.check_invariants && d.accepted()) {
      for (LinkId id : topology.path(r.source, r.dest)) {
        if (!within_capacity(topology.link(id))) throw std::logic_error("link over-committed");
      }
      if (d.completion_time() > r.deadline + 1e-9) throw std::logic_error("accepted flow misses its deadline");
    }
    if (options.on_decision) options.on_decision(r, d);
    if (options.on_flow_end && d.accepted()) {
      options.on_flow_end({r.id, r.arrival, r.deadline, d.completion_time(), true});
    }
    if (k < warmup) continue;
    ++m.offered;
    if (d.accepted()) {
      ++m.accepted;
      ++m.completed;
      m.flow_time_sum += d.flow_time(r);
      m.interval_sum += static_cast<double>(d.interval_count());
    } else {
      ++m.blocked;
    }
  }
  m.finalize();
  return m;
}

std::vector<Rate> water_fill(std::span<const FluidFlow> flows, Rate capacity) {
  std::vector<Rate> rates(flows.size());
  Rate spare = capacity;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    rates[i] = flows[i].guaranteed_rate;
    spare -= rates[i];
  }
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    if (flows[i].cap > rates[i]) open.push_back(i);
  }
  constexpr Rate kDust = 1e-15;
  while (spare > kDust && !open.empty()) {
    const Rate share = spare / static_cast<double>(open.size());
    Rate smallest_headroom = std::numeric_limits<Rate>::infinity();
    for (std::size_t i : open) smallest_headroom = std::min(smallest_headroom, flows[i].cap - rates[i]);
    if (smallest_headroom > share) {
      for (std::size_t i : open) rates[i] += share;
      break;
    }
    for (std::size_t i : open) rates[i] += smallest_headroom;
    spare -= smallest_headroom * static_cast<double>(open.size());
    std::erase_if(open, [&](std::size_t i) { return flows[i].cap - rates[i] <= kDust; });
  }
  for (std::size_t i = 0; i < flows.size(); ++i) rates[i] = std::min(rates[i], flows[i].cap);
  return rates;
}

std::string setting_name(const TransportSetting& setting) {
  struct Namer {
    std::string operator()(const NoAdmissionControl& s) const {
      if (s.r_max_ratio == 0.01) return "noac-internet";
      if (s.r_max_ratio == 0.1) return "noac-grid";
      char buf[48];
      std::snprintf(buf, sizeof buf, "noac:%.6g", s.r_max_ratio);
      return buf;
    }
    std::string operator()(const AdmissionIdeal&) const { return "ac-ideal"; }
    std::string operator()(const AdmissionDull&) const { return "ac-dull"; }
    std::string operator()(const SchemeDull& s) const { return scheme_name(s.scheme); }
  };
  return std::visit(Namer{}, setting);
}

TransportSetting parse_setting(std::string_view name, double theta) {
  if (name == "noac-internet") return NoAdmissionControl{0.01};
  if (name == "noac-grid") return NoAdmissionControl{0.1};
  if (name.starts_with("noac:")) {
    const std::string arg(name.substr(5));
    char* end = nullptr;
    const double ratio = std::strtod(arg.c_str(), &end);
    if (arg.empty() || *end != '\0' || !(ratio > 0.0 && ratio <= 1.0)) {
      throw std::invalid_argument("bad no-admission ratio: " + arg);
    }
    return NoAdmissionControl{ratio};
  }
  if (name == "ac-ideal" || name == "rmin-ideal") return AdmissionIdeal{};
  if (name == "ac-dull" || name == "mmmm") return AdmissionDull{};
  return SchemeDull{parse_scheme(name, theta)};
}

namespace {

enum class FluidEvent { Completion, Deadline, Arrival };

struct FluidParams {
  Rate r_max;
  Rate r_min;
  bool admission;
  bool ideal;
  std::size_t slots;
};

Metrics run_fluid(const FluidParams& p, WorkloadSpec workload, Rate capacity, std::size_t num_arrivals,
                  const SimOptions& options) {
  workload.r_max = p.r_max;
  workload.r_min = p.r_min;
  RequestStream stream(workload, {0}, {1});
  const std::size_t warmup = warmup_count(options.warmup_fraction, num_arrivals);

  Metrics m;
  std::vector<FluidFlow> flows;
  Seconds now = 0.0;
  std::size_t generated = 0;
  Request pending{};
  bool has_pending = num_arrivals > 0;
  if (has_pending) pending = stream.next();

  auto finish = [&](std::size_t i, bool completed) {
    const FluidFlow& f = flows[i];
    if (options.on_flow_end) options.on_flow_end({f.id, f.arrival, f.deadline, now, completed});
    if (f.counted) {
      if (completed) {
        ++m.completed;
        m.flow_time_sum += now - f.arrival;
      } else {
        ++m.failed;
      }
    }
    flows[i] = flows.back();
    flows.pop_back();
  };

  auto reassign = [&] {
    if (p.ideal) {
      const auto rates = water_fill(flows, capacity);
      for (std::size_t i = 0; i < flows.size(); ++i) flows[i].current_rate = rates[i];
      if (options.check_invariants) {
        const Rate total = std::accumulate(rates.begin(), rates.end(), 0.0);
        if (total > capacity + 1e-9) throw std::logic_error("fluid rates exceed capacity");
      }
    }
  };

  while (has_pending || !flows.empty()) {
    constexpr Seconds kNever = std::numeric_limits<Seconds>::infinity();
    Seconds t_done = kNever;
    std::size_t done_idx = 0;
    Seconds t_dead = kNever;
    for (std::size_t i = 0; i < flows.size(); ++i) {
      const FluidFlow& f = flows[i];
      if (f.current_rate > 0.0) {
        const Seconds t = now + f.volume_remaining / f.current_rate;
        if (t < t_done) {
          t_done = t;
          done_idx = i;
        }
      }
      if (!p.admission) t_dead = std::min(t_dead, f.deadline);
    }
    const Seconds t_arr = has_pending ? pending.arrival : kNever;
    FluidEvent ev = FluidEvent::Completion;
    Seconds t_next = t_done;
    if (t_dead < t_next) {
      ev = FluidEvent::Deadline;
      t_next = t_dead;
    }
    if (t_arr < t_next) {
      ev = FluidEvent::Arrival;
      t_next = t_arr;
    }
    if (t_next == kNever) throw std::logic_error("fluid simulation stalled");

    const Seconds dt = t_next - now;
    for (FluidFlow& f : flows) f.volume_remaining -= f.current_rate * dt;
    now = t_next;

    switch (ev) {
      case FluidEvent::Completion: {
        flows[done_idx].volume_remaining = 0.0;
        for (std::size_t i = flows.size(); i-- > 0;) {
          if (flows[i].volume_remaining <= 1e-12 * flows[i].volume) {
            if (p.admission && options.check_invariants && now > flows[i].deadline + 1e-9) {
              throw std::logic_error("admitted flow missed its deadline");
            }
            finish(i, true);
          }
        }
        break;
      }
      case FluidEvent::Deadline: {
        for (std::size_t i = flows.size(); i-- > 0;) {
          if (flows[i].deadline <= now) finish(i, flows[i].volume_remaining <= 1e-12 * flows[i].volume);
        }
        break;
      }
      case FluidEvent::Arrival: {
        const bool counted = generated >= warmup;
        ++generated;
        if (counted) ++m.offered;
        const bool admit = !p.admission || flows.size() < p.slots;
        if (admit) {
          if (counted) ++m.accepted;
          FluidFlow f;
          f.id = pending.id;
          f.arrival = pending.arrival;
          f.volume = pending.volume;
          f.volume_remaining = pending.volume;
          f.guaranteed_rate = p.admission ? p.r_min : 0.0;
          f.current_rate = p.admission ? p.r_min : 0.0;
          f.cap = p.ideal ? p.r_max : p.r_min;
          f.deadline = pending.deadline;
          f.counted = counted;
          flows.push_back(f);
        } else if (counted) {
          ++m.blocked;
        }
        has_pending = generated < num_arrivals;
        if (has_pending) pending = stream.next();
        break;
      }
    }
    reassign();
  }
  m.finalize();
  return m;
}

}  // namespace

Metrics run_transport_sim(const TransportSetting& setting, const WorkloadSpec& workload, Rate capacity,
                          std::size_t num_arrivals, const SimOptions& options) {
  if (!(capacity > 0.0)) throw std::invalid_argument("capacity must be positive");
  const std::size_t slots = static_cast<std::size_t>(std::floor(capacity / workload.r_min + 1e-9));
  if (const auto* s = std::get_if<SchemeDull>(&setting)) {
    return run_reservation_sim(Topology::single_link(capacity), s->scheme, workload, num_arrivals, options);
  }
  if (const auto* s = std::get_if<NoAdmissionControl>(&setting)) {
    const Rate r_max = s->r_max_ratio * capacity;
    const Rate r_min = r_max * (workload.r_min / workload.r_max);
    return run_fluid({r_max, r_min, false, true, 0}, workload, capacity, num_arrivals, options);
  }
  const bool ideal = std::holds_alternative<AdmissionIdeal>(setting);
  return run_fluid({workload.r_max, workload.r_min, true, ideal, slots}, workload, capacity, num_arrivals, options);
}

double erlang_b(unsigned m, double a) {
  if (a < 0.0) throw std::invalid_argument("offered load must be nonnegative");
  double b = 1.0;
  for (unsigned k = 1; k <= m; ++k) b = a * b / (static_cast<double>(k) + a * b);
  return b;
}

}  // namespace bulkresv
