#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bulkresv/experiment.hpp"

namespace bulkresv {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `key = value` lines grouped under [experiment], [topology], [workload]
/// and [run]; '#' starts a comment. Unset keys keep `base`'s values.
ExperimentSpec parse_config(std::string_view text, ExperimentSpec base = {});
std::string render_config(const ExperimentSpec& spec);
ExperimentSpec load_config(const std::string& path, ExperimentSpec base = {});

/// Defaults for motivation, single-link, star, intervals, oracle-check and custom.
ExperimentSpec default_spec(std::string_view experiment);

inline constexpr std::string_view kCsvHeader =
    "experiment,topology_n,load,scheme,replication,offered,accepted,blocked,failed,"
    "blocking_prob,fail_prob,mean_flow_time,mean_intervals,seed";

/// Header, then per cell one row per replication and a `replication=agg`
/// row holding the column means.
std::string format_csv(std::span<const CellResult> cells, std::uint64_t master_seed);
/// Throws std::runtime_error when the file cannot be written.
void write_csv(std::span<const CellResult> cells, std::uint64_t master_seed, const std::string& path);

/// Mean ± std per cell.
std::string format_summary(std::span<const CellResult> cells);

/// Decisions of every scheme on the worked four-reservation example.
std::string demo_worked_example();

/// Command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bulkresv
