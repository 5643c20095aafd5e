#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bulkresv/sim.hpp"

namespace bulkresv {

enum class TopologyKind { SingleLink, Star };
enum class VolumeKind { Constant, Exponential };

/// One experiment: every (size, load, setting) cell run for `replications`
/// independent seeds. Rates are ratios of the link capacity.
struct ExperimentSpec {
  std::string experiment = "custom";
  std::vector<double> loads{0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6};
  std::vector<std::string> settings{"ftfr-rmax", "ftfr-rmin", "threshold", "flextime", "multi-interval"};
  TopologyKind topology = TopologyKind::SingleLink;
  std::vector<int> sizes{1};
  Rate capacity = 1.0;
  VolumeKind volume_kind = VolumeKind::Constant;
  Volume volume = 1.0;
  double rmax_ratio = 0.1;
  double rmin_ratio = 0.05;
  double theta = 0.2;
  std::size_t arrivals = 100000;
  std::size_t replications = 10;
  std::uint64_t master_seed = 1;
  double warmup = 0.1;
  std::string output;

  friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

/// Throws std::invalid_argument describing the first violated constraint.
void validate(const ExperimentSpec& spec);

/// Workload of one cell: the per-link offered load equals `load`, so a star
/// with n ingress links receives n times the single-link arrival rate.
WorkloadSpec cell_workload(const ExperimentSpec& spec, int size, double load, std::uint64_t seed);

/// Depends only on the master seed, the load value and the replication, so
/// every setting and topology size sees the same arrival streams.
std::uint64_t cell_seed(std::uint64_t master, double load, std::size_t replication);

struct CellResult {
  std::string experiment;
  int topology_n = 1;
  double load = 0.0;
  std::string setting;
  std::vector<Metrics> replications;
  std::vector<std::uint64_t> seeds;
  std::string error;

  ReplicationStats stat(double Metrics::*field) const;
};

/// Runs every cell. Cells are independent and may run on `threads` workers
/// (0 = hardware concurrency); results are ordered size, load, setting.
/// A failing cell records its error instead of aborting the sweep.
std::vector<CellResult> sweep(const ExperimentSpec& spec, unsigned threads = 0);

struct ErlangCheck {
  double load = 0.0;
  unsigned servers = 0;
  double offered_erlangs = 0.0;
  double expected = 0.0;
  double simulated = 0.0;
  double standard_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Compares an ac-dull cell against Erlang-B with m = C / r_min servers,
/// tolerance max(0.005, 2 standard errors).
ErlangCheck check_against_erlang(const ExperimentSpec& spec, const CellResult& cell);

}  // namespace bulkresv
