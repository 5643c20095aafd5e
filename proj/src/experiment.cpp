#include "bulkresv/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

namespace bulkresv {

void validate(const ExperimentSpec& spec) {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (spec.loads.empty()) fail("loads must not be empty");
  if (spec.settings.empty()) fail("settings must not be empty");
  if (spec.sizes.empty()) fail("sizes must not be empty");
  for (double rho : spec.loads) {
    if (!(rho > 0.0) || !std::isfinite(rho)) fail("loads must be positive");
  }
  for (int n : spec.sizes) {
    if (n < 1) fail("topology sizes must be >= 1");
  }
  if (spec.topology == TopologyKind::SingleLink && (spec.sizes.size() != 1 || spec.sizes[0] != 1)) {
    fail("single-link topology has size 1");
  }
  if (!(spec.capacity > 0.0)) fail("capacity must be positive");
  if (!(spec.volume > 0.0)) fail("volume must be positive");
  for (double ratio : {spec.rmax_ratio, spec.rmin_ratio, spec.theta}) {
    if (!(ratio > 0.0 && ratio <= 1.0)) fail("ratios must lie in (0, 1]");
  }
  if (spec.rmin_ratio > spec.rmax_ratio) fail("rmin_ratio must not exceed rmax_ratio");
  if (spec.arrivals == 0) fail("arrivals must be positive");
  if (spec.replications == 0) fail("replications must be positive");
  if (!(spec.warmup >= 0.0 && spec.warmup < 1.0)) fail("warmup must lie in [0, 1)");
  for (const std::string& s : spec.settings) parse_setting(s, spec.theta);
}

std::uint64_t cell_seed(std::uint64_t master, double load, std::size_t replication) {
  return derive_seed(master, {std::bit_cast<std::uint64_t>(load), static_cast<std::uint64_t>(replication)});
}

WorkloadSpec cell_workload(const ExperimentSpec& spec, int size, double load, std::uint64_t seed) {
  WorkloadSpec w;
  const int sources = spec.topology == TopologyKind::Star ? size : 1;
  w.arrival_rate = static_cast<double>(sources) * load * spec.capacity / spec.volume;
  if (spec.volume_kind == VolumeKind::Constant) {
    w.volume = ConstantVolume{spec.volume};
  } else {
    w.volume = ExponentialVolume{spec.volume};
  }
  w.r_max = spec.rmax_ratio * spec.capacity;
  w.r_min = spec.rmin_ratio * spec.capacity;
  w.seed = seed;
  return w;
}

ReplicationStats CellResult::stat(double Metrics::*field) const {
  std::vector<double> v;
  v.reserve(replications.size());
  for (const Metrics& m : replications) v.push_back(m.*field);
  return summarize(v);
}

namespace {

Metrics run_cell(const ExperimentSpec& spec, int size, double load, const TransportSetting& setting,
                 std::uint64_t seed) {
  const WorkloadSpec w = cell_workload(spec, size, load, seed);
  SimOptions options;
  options.warmup_fraction = spec.warmup;
  if (const auto* s = std::get_if<SchemeDull>(&setting)) {
    Topology topo = spec.topology == TopologyKind::Star ? Topology::star(size, spec.capacity)
                                                        : Topology::single_link(spec.capacity);
    return run_reservation_sim(std::move(topo), s->scheme, w, spec.arrivals, options);
  }
  if (spec.topology != TopologyKind::SingleLink) {
    throw std::invalid_argument("transport settings run on a single link only");
  }
  return run_transport_sim(setting, w, spec.capacity, spec.arrivals, options);
}

}  // namespace

std::vector<CellResult> sweep(const ExperimentSpec& spec, unsigned threads) {
  validate(spec);
  std::vector<CellResult> cells;
  std::vector<TransportSetting> parsed;
  for (const std::string& s : spec.settings) parsed.push_back(parse_setting(s, spec.theta));

  struct Task {
    std::size_t cell;
    std::size_t setting;
    std::size_t rep;
  };
  std::vector<Task> tasks;
  for (int n : spec.sizes) {
    for (double load : spec.loads) {
      for (std::size_t s = 0; s < parsed.size(); ++s) {
        CellResult c;
        c.experiment = spec.experiment;
        c.topology_n = n;
        c.load = load;
        c.setting = setting_name(parsed[s]);
        c.replications.resize(spec.replications);
        for (std::size_t rep = 0; rep < spec.replications; ++rep) {
          c.seeds.push_back(cell_seed(spec.master_seed, load, rep));
          tasks.push_back({cells.size(), s, rep});
        }
        cells.push_back(std::move(c));
      }
    }
  }

  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      const Task& t = tasks[k];
      CellResult& c = cells[t.cell];
      try {
        c.replications[t.rep] = run_cell(spec, c.topology_n, c.load, parsed[t.setting], c.seeds[t.rep]);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    CellResult& c = cells[tasks[k].cell];
    if (!errors[k].empty() && c.error.empty()) c.error = errors[k];
  }
  return cells;
}

ErlangCheck check_against_erlang(const ExperimentSpec& spec, const CellResult& cell) {
  ErlangCheck out;
  out.load = cell.load;
  out.servers = static_cast<unsigned>(std::floor(1.0 / spec.rmin_ratio + 1e-9));
  out.offered_erlangs = cell.load * spec.capacity / (spec.rmin_ratio * spec.capacity);
  out.expected = erlang_b(out.servers, out.offered_erlangs);
  const ReplicationStats s = cell.stat(&Metrics::blocking_probability);
  out.simulated = s.mean;
  out.standard_error = s.standard_error();
  out.tolerance = std::max(0.005, 2.0 * out.standard_error);
  out.pass = cell.error.empty() && std::abs(out.simulated - out.expected) <= out.tolerance;
  return out;
}

}  // namespace bulkresv
