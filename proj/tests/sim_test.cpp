#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bulkresv/sim.hpp"

using namespace bulkresv;

namespace {

// Closed form by direct summation of a^k / k!.
double erlang_b_sum(unsigned m, double a) {
  double term = 1.0;
  double total = 1.0;
  for (unsigned k = 1; k <= m; ++k) {
    term *= a / k;
    total += term;
  }
  return term / total;
}

WorkloadSpec workload(double load, std::uint64_t seed, double rmax = 0.1, double rmin = 0.05,
                      VolumeDistribution vol = ConstantVolume{1.0}) {
  WorkloadSpec w;
  w.arrival_rate = load / mean_volume(vol);
  w.volume = vol;
  w.r_max = rmax;
  w.r_min = rmin;
  w.seed = seed;
  return w;
}

FluidFlow flow(Rate guaranteed, Rate cap) {
  FluidFlow f;
  f.guaranteed_rate = guaranteed;
  f.cap = cap;
  return f;
}

}  // namespace

TEST_CASE("erlang_b matches direct summation") {
  CHECK(erlang_b(0, 3.0) == 1.0);
  CHECK(erlang_b(1, 1.0) == doctest::Approx(0.5));
  CHECK(erlang_b(10, 8.0) == doctest::Approx(0.1217).epsilon(1e-3));
  for (unsigned m : {1u, 5u, 10u, 20u}) {
    for (double a : {0.5, 5.0, 8.0, 10.0, 25.0}) CHECK(erlang_b(m, a) == doctest::Approx(erlang_b_sum(m, a)));
  }
  CHECK_THROWS_AS(erlang_b(3, -1.0), std::invalid_argument);
}

TEST_CASE("water filling") {
  const std::vector<FluidFlow> five(5, flow(1.0, 2.0));
  for (Rate r : water_fill(five, 20.0)) CHECK(r == 2.0);

  const std::vector<FluidFlow> two{flow(1.0, 2.0), flow(1.0, 10.0)};
  const auto rates = water_fill(two, 10.0);
  CHECK(rates[0] == doctest::Approx(2.0));
  CHECK(rates[1] == doctest::Approx(8.0));

  const std::vector<FluidFlow> shared(4, flow(0.0, 1.0));
  for (Rate r : water_fill(shared, 2.0)) CHECK(r == doctest::Approx(0.5));
  CHECK(water_fill({}, 1.0).empty());
}

TEST_CASE("summary statistics") {
  const std::vector<double> v{1.0, 2.0, 3.0};
  const ReplicationStats s = summarize(v);
  CHECK(s.mean == 2.0);
  CHECK(s.stddev == 1.0);
  CHECK(s.standard_error() == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(summarize(std::vector<double>{4.0}).stddev == 0.0);
}

TEST_CASE("request streams use a fixed number of draws") {
  RequestStream a(workload(0.5, 9), {0}, {1});
  RequestStream b(workload(0.5, 9, 0.1, 0.05, ExponentialVolume{1.0}), {0, 1, 2}, {3, 4, 5});
  for (int i = 0; i < 100; ++i) {
    const Request x = a.next();
    const Request y = b.next();
    CHECK(x.arrival == y.arrival);
    CHECK(x.id == y.id);
    CHECK(x.deadline == doctest::Approx(x.arrival + 20.0));
    CHECK(y.deadline == doctest::Approx(y.arrival + y.volume / 0.05));
    CHECK(y.source <= 2);
    CHECK(y.dest >= 3);
  }
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
}

TEST_CASE("single flow without admission control runs at r_max") {
  std::vector<FlowOutcome> ends;
  SimOptions opt;
  opt.warmup_fraction = 0.0;
  opt.on_flow_end = [&](const FlowOutcome& o) { ends.push_back(o); };
  const Metrics m = run_transport_sim(NoAdmissionControl{0.1}, workload(0.5, 3), 1.0, 1, opt);
  REQUIRE(ends.size() == 1);
  CHECK(ends[0].end - ends[0].arrival == doctest::Approx(10.0));
  CHECK(m.completed == 1);
  CHECK(m.failed == 0);
  CHECK(m.mean_flow_time == doctest::Approx(10.0));
}

TEST_CASE("light load flow times") {
  const WorkloadSpec w = workload(1e-4, 4);
  const Metrics mi = run_reservation_sim(Topology::single_link(1.0), MultiInterval{}, w, 200);
  CHECK(mi.blocked == 0);
  CHECK(mi.mean_flow_time == doctest::Approx(10.0));
  CHECK(mi.mean_intervals_per_flow == 1.0);
  const Metrics lo = run_reservation_sim(Topology::single_link(1.0), FixTimeFixRate{RateRule::MinRate}, w, 200);
  CHECK(lo.mean_flow_time == doctest::Approx(20.0));
  const Metrics dull = run_transport_sim(AdmissionDull{}, w, 1.0, 200);
  CHECK(dull.mean_flow_time == doctest::Approx(20.0));
  const Metrics ideal = run_transport_sim(AdmissionIdeal{}, w, 1.0, 200);
  CHECK(ideal.mean_flow_time == doctest::Approx(10.0));
}

TEST_CASE("warm-up arrivals are excluded") {
  const Metrics m = run_reservation_sim(Topology::single_link(1.0), MultiInterval{}, workload(0.6, 1), 1000);
  CHECK(m.offered == 900);
  CHECK(m.accepted + m.blocked == m.offered);
  SimOptions none;
  none.warmup_fraction = 0.0;
  CHECK(run_transport_sim(AdmissionDull{}, workload(0.6, 1), 1.0, 1000, none).offered == 1000);
}

TEST_CASE("runs are deterministic") {
  for (const char* name : {"ac-ideal", "ac-dull", "noac-grid", "multi-interval", "threshold"}) {
    const TransportSetting s = parse_setting(name);
    const Metrics a = run_transport_sim(s, workload(1.0, 42), 1.0, 3000);
    const Metrics b = run_transport_sim(s, workload(1.0, 42), 1.0, 3000);
    CHECK(a.blocked == b.blocked);
    CHECK(a.failed == b.failed);
    CHECK(a.flow_time_sum == b.flow_time_sum);
  }
}

TEST_CASE("admitted flows meet their deadlines") {
  for (const char* name : {"ac-ideal", "ac-dull"}) {
    std::size_t ends = 0;
    SimOptions opt;
    opt.on_flow_end = [&](const FlowOutcome& o) {
      ++ends;
      CHECK(o.completed);
      CHECK(o.end <= o.deadline + 1e-9);
    };
    const Metrics m = run_transport_sim(parse_setting(name), workload(1.2, 8, 0.1, 0.05, ExponentialVolume{1.0}),
                                        1.0, 4000, opt);
    CHECK(m.failed == 0);
    CHECK(m.accepted + m.blocked == m.offered);
    CHECK(ends > 2000);
  }
}

TEST_CASE("no admission control fails flows under overload") {
  const Metrics m = run_transport_sim(NoAdmissionControl{0.1}, workload(1.2, 8), 1.0, 4000);
  CHECK(m.blocked == 0);
  CHECK(m.failed > 0);
  CHECK(m.fail_probability > 0.05);
}

TEST_CASE("ideal sharing finishes no later than dull transport") {
  const WorkloadSpec w = workload(0.8, 12, 0.1, 0.05, ExponentialVolume{1.0});
  const Metrics dull = run_transport_sim(AdmissionDull{}, w, 1.0, 4000);
  const Metrics ideal = run_transport_sim(AdmissionIdeal{}, w, 1.0, 4000);
  CHECK(ideal.mean_flow_time < dull.mean_flow_time);
}

TEST_CASE("blocking grows with load") {
  const Metrics lo = run_reservation_sim(Topology::single_link(1.0), MultiInterval{}, workload(0.4, 2), 5000);
  const Metrics hi = run_reservation_sim(Topology::single_link(1.0), MultiInterval{}, workload(1.2, 2), 5000);
  CHECK(lo.blocking_probability < hi.blocking_probability);
}

TEST_CASE("flextime and multi-interval agree on a single link") {
  std::vector<Decision> flex;
  std::vector<Decision> multi;
  SimOptions a;
  a.on_decision = [&](const Request&, const Decision& d) { flex.push_back(d); };
  SimOptions b;
  b.on_decision = [&](const Request&, const Decision& d) { multi.push_back(d); };
  run_reservation_sim(Topology::single_link(1.0), FlexTimeFlexRate{}, workload(0.8, 6), 5000, a);
  run_reservation_sim(Topology::single_link(1.0), MultiInterval{}, workload(0.8, 6), 5000, b);
  CHECK(flex == multi);
}

TEST_CASE("setting names") {
  for (const char* name : {"noac-internet", "noac-grid", "ac-ideal", "ac-dull", "ftfr-rmin", "multi-interval"}) {
    CHECK(setting_name(parse_setting(name)) == name);
  }
  CHECK(setting_name(parse_setting("rmin-ideal")) == "ac-ideal");
  CHECK(setting_name(parse_setting("mmmm")) == "ac-dull");
  CHECK(std::get<NoAdmissionControl>(parse_setting("noac:0.25")).r_max_ratio == 0.25);
  CHECK_THROWS_AS(parse_setting("noac:2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_setting("bogus"), std::invalid_argument);
}
