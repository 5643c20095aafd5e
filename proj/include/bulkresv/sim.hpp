#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bulkresv/network.hpp"
#include "bulkresv/reservation.hpp"

namespace bulkresv {

struct ConstantVolume {
  Volume value = 1.0;
  friend bool operator==(const ConstantVolume&, const ConstantVolume&) = default;
};

struct ExponentialVolume {
  Volume mean = 1.0;
  friend bool operator==(const ExponentialVolume&, const ExponentialVolume&) = default;
};

using VolumeDistribution = std::variant<ConstantVolume, ExponentialVolume>;

Volume mean_volume(const VolumeDistribution& dist);

/// Poisson arrivals; every request gets deadline arrival + volume / r_min.
struct WorkloadSpec {
  double arrival_rate = 1.0;
  VolumeDistribution volume = ConstantVolume{};
  Rate r_max = 0.1;
  Rate r_min = 0.05;
  std::uint64_t seed = 1;

  /// lambda * E[v] / capacity
  double load(Rate capacity) const { return arrival_rate * mean_volume(volume) / capacity; }
};

/// Mixes a master seed with cell coordinates into an independent stream seed.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coordinates);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform on [0, 1) from the top 53 bits of one draw.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double exponential(double rate);
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform01() * static_cast<double>(n)); }

 private:
  std::mt19937_64 engine_;
};

/// Request generator; every request consumes the same number of draws
/// regardless of topology size.
class RequestStream {
 public:
  RequestStream(const WorkloadSpec& workload, std::vector<SiteId> sources, std::vector<SiteId> dests);
  Request next();

 private:
  WorkloadSpec workload_;
  std::vector<SiteId> sources_;
  std::vector<SiteId> dests_;
  Rng rng_;
  Seconds clock_ = 0.0;
  RequestId next_id_ = 0;
};

struct Metrics {
  std::size_t offered = 0;
  std::size_t accepted = 0;
  std::size_t blocked = 0;
  std::size_t failed = 0;
  std::size_t completed = 0;
  double blocking_probability = 0.0;
  double fail_probability = 0.0;
  double mean_flow_time = 0.0;
  double mean_intervals_per_flow = 0.0;

  double flow_time_sum = 0.0;
  double interval_sum = 0.0;

  /// Derives the probabilities and means from the counters.
  void finalize();
};

struct ReplicationStats {
  std::vector<double> values;
  double mean = 0.0;
  double stddev = 0.0;

  double standard_error() const;
};

/// Sample mean and sample (n-1) standard deviation.
ReplicationStats summarize(std::span<const double> values);

struct FlowOutcome {
  RequestId id = 0;
  Seconds arrival = 0.0;
  Seconds deadline = 0.0;
  Seconds end = 0.0;
  bool completed = false;
};

struct SimOptions {
  /// Leading fraction of arrivals excluded from the metrics.
  double warmup_fraction = 0.1;
  /// Re-check link capacity after each commit and rate sums after each event.
  bool check_invariants = true;
  std::function<void(const Request&, const Decision&)> on_decision;
  std::function<void(const FlowOutcome&)> on_flow_end;
};

/// Dull transport: accepted flows use exactly their reservation and finish
/// at its last breakpoint.
Metrics run_reservation_sim(Topology topology, const SchemeKind& scheme, const WorkloadSpec& workload,
                            std::size_t num_arrivals, const SimOptions& options = {});

/// Fluid flow on a single link.
struct FluidFlow {
  RequestId id = 0;
  Seconds arrival = 0.0;
  Volume volume = 0.0;
  Volume volume_remaining = 0.0;
  Rate guaranteed_rate = 0.0;
  Rate current_rate = 0.0;
  Rate cap = 0.0;
  Seconds deadline = 0.0;
  bool counted = false;
};

/// Guaranteed rates first, then the spare capacity in equal shares, with
/// flows that reach their cap handing their surplus back for redistribution.
std::vector<Rate> water_fill(std::span<const FluidFlow> flows, Rate capacity);

/// Ideal transport, no admission; rates are min(r_max, C/n). A flow that has
/// not finished by arrival + v/r_min terminates as failed.
/// r_max = ratio * C, r_min keeps the workload's r_min/r_max proportion.
struct NoAdmissionControl {
  double r_max_ratio = 0.1;
  friend bool operator==(const NoAdmissionControl&, const NoAdmissionControl&) = default;
};
/// Admit while fewer than C/r_min flows are active; flows share unreserved
/// capacity on top of r_min, capped at r_max.
struct AdmissionIdeal {
  friend bool operator==(const AdmissionIdeal&, const AdmissionIdeal&) = default;
};
/// Same admission; flows run at exactly r_min (M/M/m/m for exponential volumes).
struct AdmissionDull {
  friend bool operator==(const AdmissionDull&, const AdmissionDull&) = default;
};
/// A reservation scheme with dull transport.
struct SchemeDull {
  SchemeKind scheme;
  friend bool operator==(const SchemeDull&, const SchemeDull&) = default;
};

using TransportSetting = std::variant<NoAdmissionControl, AdmissionIdeal, AdmissionDull, SchemeDull>;

std::string setting_name(const TransportSetting& setting);
/// Scheme names, plus noac-internet, noac-grid, noac:<ratio>, ac-ideal
/// (alias rmin-ideal) and ac-dull (alias mmmm).
TransportSetting parse_setting(std::string_view name, double theta = 0.2);

Metrics run_transport_sim(const TransportSetting& setting, const WorkloadSpec& workload, Rate capacity,
                          std::size_t num_arrivals, const SimOptions& options = {});

/// Erlang-B blocking probability for m servers and offered load a (Erlangs).
double erlang_b(unsigned m, double a);

}  // namespace bulkresv
