#include "bulkresv/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "bulkresv/network.hpp"

namespace bulkresv {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto comma = s.find(',', pos);
    if (comma == std::string_view::npos) comma = s.size();
    std::string item = trim(s.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(std::move(item));
    pos = comma + 1;
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE) throw ConfigError("bad number for " + key + ": '" + v + "'");
  return d;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE || v[0] == '-') {
    throw ConfigError("bad integer for " + key + ": '" + v + "'");
  }
  return x;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const std::string& item : split_list(v)) out.push_back(to_double(key, item));
  return out;
}

std::vector<int> to_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const std::string& item : split_list(v)) out.push_back(static_cast<int>(to_u64(key, item)));
  return out;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt6(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F render) {
  std::string out;
  for (const T& x : items) {
    if (!out.empty()) out += ", ";
    out += render(x);
  }
  return out;
}

}  // namespace

ExperimentSpec parse_config(std::string_view text, ExperimentSpec spec) {
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section != "experiment" && section != "topology" && section != "workload" && section != "run") {
        throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const std::string qualified = section + "." + key;

    if (qualified == "experiment.name") {
      spec.experiment = value;
    } else if (qualified == "experiment.output") {
      spec.output = value;
    } else if (qualified == "topology.kind") {
      if (value == "single") spec.topology = TopologyKind::SingleLink;
      else if (value == "star") spec.topology = TopologyKind::Star;
      else throw ConfigError("topology.kind must be single or star");
    } else if (qualified == "topology.sizes") {
      spec.sizes = to_ints(key, value);
    } else if (qualified == "topology.capacity") {
      spec.capacity = to_double(key, value);
    } else if (qualified == "workload.volume_dist") {
      if (value == "constant") spec.volume_kind = VolumeKind::Constant;
      else if (value == "exponential") spec.volume_kind = VolumeKind::Exponential;
      else throw ConfigError("workload.volume_dist must be constant or exponential");
    } else if (qualified == "workload.volume") {
      spec.volume = to_double(key, value);
    } else if (qualified == "workload.rmax_ratio") {
      spec.rmax_ratio = to_double(key, value);
    } else if (qualified == "workload.rmin_ratio") {
      spec.rmin_ratio = to_double(key, value);
    } else if (qualified == "workload.theta") {
      spec.theta = to_double(key, value);
    } else if (qualified == "run.loads") {
      spec.loads = to_doubles(key, value);
    } else if (qualified == "run.settings") {
      spec.settings = split_list(value);
    } else if (qualified == "run.arrivals") {
      spec.arrivals = to_u64(key, value);
    } else if (qualified == "run.replications") {
      spec.replications = to_u64(key, value);
    } else if (qualified == "run.seed") {
      spec.master_seed = to_u64(key, value);
    } else if (qualified == "run.warmup") {
      spec.warmup = to_double(key, value);
    } else {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key " + qualified);
    }
  }
  try {
    validate(spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

std::string render_config(const ExperimentSpec& spec) {
  std::ostringstream os;
  os << "[experiment]\n"
     << "name = " << spec.experiment << "\n"
     << "output = " << spec.output << "\n\n"
     << "[topology]\n"
     << "kind = " << (spec.topology == TopologyKind::Star ? "star" : "single") << "\n"
     << "sizes = " << join(spec.sizes, [](int n) { return std::to_string(n); }) << "\n"
     << "capacity = " << fmt17(spec.capacity) << "\n\n"
     << "[workload]\n"
     << "volume_dist = " << (spec.volume_kind == VolumeKind::Constant ? "constant" : "exponential") << "\n"
     << "volume = " << fmt17(spec.volume) << "\n"
     << "rmax_ratio = " << fmt17(spec.rmax_ratio) << "\n"
     << "rmin_ratio = " << fmt17(spec.rmin_ratio) << "\n"
     << "theta = " << fmt17(spec.theta) << "\n\n"
     << "[run]\n"
     << "loads = " << join(spec.loads, fmt17) << "\n"
     << "settings = " << join(spec.settings, [](const std::string& s) { return s; }) << "\n"
     << "arrivals = " << spec.arrivals << "\n"
     << "replications = " << spec.replications << "\n"
     << "seed = " << spec.master_seed << "\n"
     << "warmup = " << fmt17(spec.warmup) << "\n";
  return os.str();
}

ExperimentSpec load_config(const std::string& path, ExperimentSpec base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

ExperimentSpec default_spec(std::string_view experiment) {
  ExperimentSpec s;
  s.experiment = std::string(experiment);
  s.output = s.experiment + ".csv";
  if (experiment == "motivation") {
    s.settings = {"noac-internet", "noac-grid", "ac-ideal", "ac-dull"};
    s.volume_kind = VolumeKind::Exponential;
    s.arrivals = 20000;
  } else if (experiment == "single-link") {
    s.settings = {"ftfr-rmax", "ftfr-rmin", "threshold", "flextime", "multi-interval", "rmin-ideal"};
  } else if (experiment == "star") {
    s.topology = TopologyKind::Star;
    s.sizes = {10};
  } else if (experiment == "intervals") {
    s.topology = TopologyKind::Star;
    s.sizes = {2, 5, 10, 20, 40};
    s.loads = {0.6, 1.0};
    s.settings = {"multi-interval"};
    s.arrivals = 20000;
    s.replications = 5;
  } else if (experiment == "oracle-check") {
    s.settings = {"ac-dull"};
    s.loads = {0.5, 0.8, 1.0};
    s.volume_kind = VolumeKind::Exponential;
    s.rmax_ratio = 0.1;
    s.rmin_ratio = 0.1;
  } else if (experiment != "custom") {
    throw ConfigError("unknown experiment " + std::string(experiment));
  }
  return s;
}

std::string format_csv(std::span<const CellResult> cells, std::uint64_t master_seed) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const CellResult& c : cells) {
    const std::string prefix = c.experiment + "," + std::to_string(c.topology_n) + "," + fmt6(c.load) + "," + c.setting + ",";
    if (!c.error.empty()) {
      out += prefix + "agg,nan,nan,nan,nan,nan,nan,nan,nan," + std::to_string(master_seed) + "\n";
      continue;
    }
    double sums[8] = {};
    for (std::size_t r = 0; r < c.replications.size(); ++r) {
      const Metrics& m = c.replications[r];
      const double row[8] = {static_cast<double>(m.offered), static_cast<double>(m.accepted),
                             static_cast<double>(m.blocked), static_cast<double>(m.failed),
                             m.blocking_probability, m.fail_probability, m.mean_flow_time,
                             m.mean_intervals_per_flow};
      for (int k = 0; k < 8; ++k) sums[k] += row[k];
      out += prefix + std::to_string(r) + "," + std::to_string(m.offered) + "," + std::to_string(m.accepted) + "," +
             std::to_string(m.blocked) + "," + std::to_string(m.failed) + "," + fmt6(row[4]) + "," + fmt6(row[5]) +
             "," + fmt6(row[6]) + "," + fmt6(row[7]) + "," + std::to_string(c.seeds[r]) + "\n";
    }
    out += prefix + "agg";
    const double n = static_cast<double>(c.replications.size());
    for (double s : sums) out += "," + fmt6(s / n);
    out += "," + std::to_string(master_seed) + "\n";
  }
  return out;
}

void write_csv(std::span<const CellResult> cells, std::uint64_t master_seed, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << format_csv(cells, master_seed);
  f.close();
  if (!f) throw std::runtime_error("failed writing " + path);
}

std::string format_summary(std::span<const CellResult> cells) {
  std::ostringstream os;
  os << std::left << std::setw(5) << "n" << std::setw(8) << "load" << std::setw(16) << "setting" << std::setw(25)
     << "block/fail prob" << std::setw(25) << "mean flow time" << "intervals\n";
  auto pm = [](const ReplicationStats& s) { return fmt6(s.mean) + " ± " + fmt6(s.stddev); };
  for (const CellResult& c : cells) {
    os << std::setw(5) << c.topology_n << std::setw(8) << fmt6(c.load) << std::setw(16) << c.setting;
    if (!c.error.empty()) {
      os << "error: " << c.error << "\n";
      continue;
    }
    const auto block = c.stat(&Metrics::blocking_probability);
    const auto fail = c.stat(&Metrics::fail_probability);
    // Settings without admission control report their deadline-miss rate.
    const auto& shown = fail.mean > block.mean ? fail : block;
    // setw counts bytes and the ± sign takes two
    os << std::setw(26) << (pm(shown) + " ") << std::setw(26) << (pm(c.stat(&Metrics::mean_flow_time)) + " ")
       << fmt6(c.stat(&Metrics::mean_intervals_per_flow).mean) << "\n";
  }
  return os.str();
}

namespace {

std::string describe(const Decision& d) {
  if (!d.accepted()) return "reject";
  std::string out = "accept ";
  const auto lv = d.reservation().levels();
  bool first = true;
  for (std::size_t i = 0; i + 1 < lv.size(); ++i) {
    if (lv[i].value <= 0.0) continue;
    if (!first) out += " + ";
    out += fmt6(lv[i].value) + " on [" + fmt6(lv[i].time) + "," + fmt6(lv[i + 1].time) + ")";
    first = false;
  }
  return out + ", completes at " + fmt6(d.completion_time()) + "h";
}

}  // namespace

std::string demo_worked_example() {
  // Capacity 4 Tbph; four 1 Tbph reservations end at 1h, 3h and beyond the horizon.
  LinkState link = LinkState::empty("L0", 4.0);
  for (Seconds end : {1.0, 3.0, 8.0, 8.0}) link = commit(link, Rectangle{0.0, end, 1.0}.to_function());

  std::ostringstream os;
  os << "Link capacity 4 Tbph, unreserved: ";
  const auto lv = link.remaining.levels();
  for (std::size_t i = 0; i < lv.size(); ++i) {
    os << fmt6(lv[i].value) << " from " << fmt6(lv[i].time) << "h" << (i + 1 < lv.size() ? ", " : "\n");
  }
  const SchemeKind schemes[] = {FixTimeFixRate{RateRule::MinRate}, FixTimeFixRate{RateRule::MaxRate},
                                ThresholdFixTimeFlexRate{0.2}, FlexTimeFlexRate{}, MultiInterval{}};
  for (Volume v : {2.0, 4.0, 6.0}) {
    // Rmin = 1 Tbph, so the deadline is v hours after the arrival at 0h.
    const Request r{0, 0, 1, v, 0.0, v / 1.0, 2.0};
    os << "\nrequest v=" << fmt6(v) << "Tb arrival=0h deadline=" << fmt6(r.deadline) << "h Rmax=2Tbph\n";
    for (const SchemeKind& s : schemes) {
      Topology topo = Topology::single_link(4.0);
      topo.link(LinkId{0}) = link;
      const Decision d = centralized_reserve(topo, s, r);
      os << "  " << std::left << std::setw(16) << scheme_name(s) << describe(d) << "\n";
    }
  }
  return os.str();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bandwidth reservation schemes for deadline-constrained bulk transfers"};
  app.require_subcommand(1);

  struct Flags {
    std::string config;
    std::string loads;
    std::string schemes;
    std::string sizes;
    std::size_t arrivals = 0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    std::string out;
    unsigned threads = 0;
  } flags;

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "Experiment config file")->check(CLI::ExistingFile);
    sub->add_option("--loads", flags.loads, "Comma-separated loads");
    sub->add_option("--schemes", flags.schemes, "Comma-separated schemes/settings");
    sub->add_option("--n", flags.sizes, "Star size(s), comma-separated");
    sub->add_option("--arrivals", flags.arrivals, "Arrivals per replication");
    sub->add_option("--reps", flags.reps, "Replications per cell");
    sub->add_option("--seed", flags.seed, "Master seed");
    sub->add_option("--out", flags.out, "CSV output path");
    sub->add_option("--threads", flags.threads, "Worker threads (0 = all cores)");
  };

  const char* experiments[] = {"motivation", "single-link", "star", "intervals", "oracle-check", "custom"};
  const char* help[] = {"No-AC vs AC transport settings on one link",
                        "All reservation schemes on one bottleneck link",
                        "All reservation schemes on an n x n star",
                        "Mean Multi-Interval pieces per flow vs. star size",
                        "ac-dull blocking against Erlang-B",
                        "Run the experiment described by --config"};
  std::vector<CLI::App*> runs;
  for (std::size_t i = 0; i < std::size(experiments); ++i) {
    CLI::App* sub = app.add_subcommand(experiments[i], help[i]);
    add_run_flags(sub);
    runs.push_back(sub);
  }
  CLI::App* demo = app.add_subcommand("demo-fig2", "Scheme decisions on the four-reservation example");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  if (demo->parsed()) {
    out << demo_worked_example();
    return 0;
  }

  const auto chosen = std::find_if(runs.begin(), runs.end(), [](CLI::App* s) { return s->parsed(); });
  const std::string name = (*chosen)->get_name();
  try {
    ExperimentSpec spec = default_spec(name);
    if (name == "custom" && flags.config.empty()) throw ConfigError("custom needs --config");
    if (!flags.config.empty()) spec = load_config(flags.config, spec);
    if (const char* env = std::getenv("BULKRESV_SEED")) spec.master_seed = to_u64("BULKRESV_SEED", env);
    if ((*chosen)->count("--seed")) spec.master_seed = flags.seed;
    if (!flags.loads.empty()) spec.loads = to_doubles("--loads", flags.loads);
    if (!flags.schemes.empty()) spec.settings = split_list(flags.schemes);
    if (!flags.sizes.empty()) {
      spec.sizes = to_ints("--n", flags.sizes);
      if (spec.topology == TopologyKind::SingleLink) throw ConfigError("--n applies to star experiments");
    }
    if (flags.arrivals) spec.arrivals = flags.arrivals;
    if (flags.reps) spec.replications = flags.reps;
    if (!flags.out.empty()) spec.output = flags.out;
    validate(spec);

    const auto cells = sweep(spec, flags.threads);
    if (!spec.output.empty()) write_csv(cells, spec.master_seed, spec.output);
    out << format_summary(cells);
    for (const CellResult& c : cells) {
      if (!c.error.empty()) err << "cell n=" << c.topology_n << " load=" << c.load << " " << c.setting << ": " << c.error << "\n";
    }

    if (name == "oracle-check") {
      bool all = true;
      for (const CellResult& c : cells) {
        if (c.setting != "ac-dull") continue;
        const ErlangCheck e = check_against_erlang(spec, c);
        all = all && e.pass;
        out << "load=" << fmt6(e.load) << " m=" << e.servers << " a=" << fmt6(e.offered_erlangs)
            << " erlang_b=" << fmt6(e.expected) << " sim=" << fmt6(e.simulated)
            << " |diff|=" << fmt6(std::abs(e.simulated - e.expected)) << " tol=" << fmt6(e.tolerance) << " "
            << (e.pass ? "PASS" : "FAIL") << "\n";
      }
      return all ? 0 : 1;
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace bulkresv
