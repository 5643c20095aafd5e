#include <doctest.h>

#include <random>
#include <stdexcept>

#include "bulkresv/network.hpp"
#include "test_support.hpp"

using namespace bulkresv;
using bulkresv::testing::probe_points;

namespace {

Request req(RequestId id, SiteId src, SiteId dst, double v, double a, double dl, double rmax) {
  Request r;
  r.id = id;
  r.source = src;
  r.dest = dst;
  r.volume = v;
  r.arrival = a;
  r.deadline = dl;
  r.max_rate = rmax;
  return r;
}

const SchemeKind kSchemes[] = {FixTimeFixRate{RateRule::MinRate}, FixTimeFixRate{RateRule::MaxRate},
                               ThresholdFixTimeFlexRate{0.2}, FlexTimeFlexRate{}, MultiInterval{}};

// 2x2 star: I0 carries a transfer on [0,2), E1 one on [3,4).
Topology fragmented_star() {
  Topology t = Topology::star(2, 1.0);
  CHECK(centralized_reserve(t, FixTimeFixRate{RateRule::MaxRate}, req(1, 0, 2, 2, 0, 4, 1)).accepted());
  CHECK(centralized_reserve(t, FixTimeFixRate{RateRule::MaxRate}, req(2, 1, 3, 1, 3, 5, 1)).accepted());
  return t;
}

}  // namespace

TEST_CASE("commit examples") {
  const LinkState empty = LinkState::empty("L", 4.0);
  CHECK(commit(empty, StepFunction{}) == empty);
  const LinkState one = commit(empty, Rectangle{0, 1, 1}.to_function());
  CHECK(one.remaining == StepFunction::from_levels({{0, 3}, {1, 4}}));

  LinkState worked = empty;
  for (double end : {1.0, 3.0, 8.0, 8.0}) worked = commit(worked, Rectangle{0, end, 1}.to_function());
  CHECK(restrict_to(worked.remaining, 0, 6) == StepFunction::from_levels({{1, 1}, {3, 2}, {6, 0}}));
  CHECK(within_capacity(worked));
  CHECK_THROWS_AS(commit(worked, Rectangle{0.5, 2, 1}.to_function()), std::logic_error);
  CHECK_THROWS_AS(LinkState::empty("bad", 0.0), std::invalid_argument);
}

TEST_CASE("compact examples") {
  const LinkState empty = LinkState::empty("L", 4.0);
  CHECK(compact(empty, 50.0) == empty);

  LinkState busy = empty;
  for (int i = 0; i < 100; ++i) busy = commit(busy, Rectangle{double(i), i + 0.5, 1}.to_function());
  busy = commit(busy, Rectangle{200, 210, 2}.to_function());
  const LinkState c = compact(busy, 150.0);
  CHECK(c.remaining.size() == 2 + 1);
  for (double t = 150.0; t < 220.0; t += 0.25) CHECK(c.remaining(t) == busy.remaining(t));
  CHECK(compact(c, 150.0) == c);

  const LinkState mid = compact(busy, 50.25);
  for (double t = 50.25; t < 220.0; t += 0.25) CHECK(mid.remaining(t) == busy.remaining(t));
  CHECK(mid.remaining.size() < busy.remaining.size());
}

TEST_CASE("topologies") {
  const Topology single = Topology::single_link(1.0);
  REQUIRE(single.path(0, 1).size() == 1);
  CHECK(single.link(single.path(0, 1)[0]).name == "L0");
  CHECK_THROWS_AS(single.path(1, 0), std::out_of_range);

  const Topology star = Topology::star(3, 2.0);
  CHECK(star.link_count() == 6);
  CHECK(star.ingress_sites() == std::vector<SiteId>{0, 1, 2});
  CHECK(star.egress_sites() == std::vector<SiteId>{3, 4, 5});
  for (SiteId i : star.ingress_sites()) {
    for (SiteId j : star.egress_sites()) {
      const auto& p = star.path(i, j);
      REQUIRE(p.size() == 2);
      CHECK(star.link(p[0]).name == "I" + std::to_string(i));
      CHECK(star.link(p[1]).name == "E" + std::to_string(j - 3));
    }
  }
  Topology t;
  CHECK_THROWS_AS(t.set_path(0, 1, {}), std::invalid_argument);
  CHECK_THROWS_AS(t.set_path(0, 1, {LinkId{3}}), std::invalid_argument);
  CHECK_THROWS_AS(Topology::star(0, 1.0), std::invalid_argument);
}

TEST_CASE("single link reproduces the worked example") {
  Topology t = Topology::single_link(4.0);
  const LinkId l = t.path(0, 1)[0];
  for (double end : {1.0, 3.0, 8.0, 8.0}) t.link(l) = commit(t.link(l), Rectangle{0, end, 1}.to_function());
  Topology copy = t;
  CHECK_FALSE(centralized_reserve(copy, FlexTimeFlexRate{}, req(7, 0, 1, 4, 0, 4, 2)).accepted());
  CHECK(copy == t);
  const Decision d = centralized_reserve(copy, MultiInterval{}, req(8, 0, 1, 6, 0, 6, 2));
  CHECK(d.reservation() == StepFunction::from_levels({{1, 1}, {3, 2}, {5, 0}}));
  CHECK(copy.link(l).remaining(4) == 0.0);
  CHECK(copy.link(l).remaining(5) == 2.0);
}

TEST_CASE("second link saturated at arrival rejects fixed-time schemes") {
  Topology t = Topology::star(2, 1.0);
  const LinkId e0 = t.path(0, 2)[1];
  t.link(e0) = commit(t.link(e0), Rectangle{0, 1, 1}.to_function());
  for (const SchemeKind& s : {SchemeKind{FixTimeFixRate{RateRule::MinRate}}, SchemeKind{FixTimeFixRate{RateRule::MaxRate}},
                              SchemeKind{ThresholdFixTimeFlexRate{0.2}}}) {
    Topology copy = t;
    CHECK_FALSE(centralized_reserve(copy, s, req(1, 0, 2, 1, 0, 4, 1)).accepted());
  }
  Topology copy = t;
  const Decision d = centralized_reserve(copy, MultiInterval{}, req(1, 0, 2, 1, 0, 4, 1));
  CHECK(d.reservation() == Rectangle{1, 2, 1}.to_function());
}

TEST_CASE("fragmentation: only multi-interval accepts the cross request") {
  const Request r3 = req(3, 0, 3, 2, 0, 10, 1);
  for (const SchemeKind& s : kSchemes) {
    Topology t = fragmented_star();
    const Decision d = centralized_reserve(t, s, r3);
    if (std::holds_alternative<MultiInterval>(s)) {
      REQUIRE(d.accepted());
      CHECK(d.reservation() == StepFunction::from_levels({{2, 1}, {3, 0}, {4, 1}, {5, 0}}));
      CHECK(d.interval_count() == 2);
    } else if (std::holds_alternative<FlexTimeFlexRate>(s)) {
      CHECK(d.reservation() == Rectangle{4, 6, 1}.to_function());
    } else {
      CHECK_FALSE(d.accepted());
    }
  }
}

TEST_CASE("distributed trace on one hop") {
  Topology a = Topology::single_link(1.0);
  Topology b = a;
  const Request r = req(5, 0, 1, 1, 0, 20, 0.1);
  const DistributedOutcome out = distributed_reserve(a, MultiInterval{}, r);
  REQUIRE(out.trace.size() == 2);
  CHECK(out.trace[0].phase == MessagePhase::Forward);
  CHECK(out.trace[1].phase == MessagePhase::CommitBack);
  CHECK(out.trace[1].decision == out.decision);
  CHECK(out.decision == centralized_reserve(b, MultiInterval{}, r));
  CHECK(a == b);
  CHECK(format_trace(out.trace, a) ==
        "Forward hop=0 link=L0 request=5 constraint=0:0.10000000000000001;20:-0.10000000000000001\n"
        "CommitBack hop=0 link=L0 request=5 constraint=0:0.10000000000000001;20:-0.10000000000000001"
        " decision=0:0.10000000000000001;10:-0.10000000000000001\n");
}

TEST_CASE("distributed trace on the fragmented star") {
  Topology a = fragmented_star();
  Topology b = a;
  const Request r3 = req(3, 0, 3, 2, 0, 10, 1);
  const StepFunction i0 = a.link(a.path(0, 3)[0]).remaining;
  const StepFunction e1 = a.link(a.path(0, 3)[1]).remaining;

  const DistributedOutcome out = distributed_reserve(a, MultiInterval{}, r3);
  REQUIRE(out.trace.size() == 4);
  CHECK(out.trace[0].partial_constraint == min(request_constraint(r3), i0));
  CHECK(out.trace[1].partial_constraint == min(min(request_constraint(r3), i0), e1));
  CHECK(out.trace[0].min_unreserved == 0.0);
  CHECK(out.trace[2].phase == MessagePhase::CommitBack);
  CHECK(out.trace[2].hop == 1);
  CHECK(out.trace[3].hop == 0);
  CHECK(out.decision == centralized_reserve(b, MultiInterval{}, r3));
  CHECK(a == b);

  Topology c = fragmented_star();
  const DistributedOutcome rejected = distributed_reserve(c, FixTimeFixRate{RateRule::MinRate}, r3);
  CHECK_FALSE(rejected.decision.accepted());
  REQUIRE(rejected.trace.size() == 4);
  CHECK(rejected.trace[2].phase == MessagePhase::DecisionReply);
  CHECK(c == fragmented_star());
  CHECK(format_trace(rejected.trace, c).find("DecisionReply hop=1 link=E1 request=3") != std::string::npos);
}

TEST_CASE("property: centralized and distributed agree on random sequences") {
  std::mt19937_64 rng(77);
  std::exponential_distribution<double> gap(2.0);
  std::uniform_int_distribution<int> site(0, 2);
  std::uniform_real_distribution<double> vol(0.1, 3.0);
  for (const SchemeKind& s : kSchemes) {
    Topology a = Topology::star(3, 1.0);
    Topology b = a;
    double clock = 0.0;
    for (RequestId id = 0; id < 400; ++id) {
      clock += gap(rng);
      const double v = vol(rng);
      const Request r = req(id, site(rng), 3 + site(rng), v, clock, clock + v / 0.1, 0.4);
      const Decision dc = centralized_reserve(a, s, r);
      const Decision dd = distributed_reserve(b, s, r).decision;
      REQUIRE(dc == dd);
      REQUIRE(a == b);
    }
  }
}

TEST_CASE("property: conservation and non-preemption") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> when(0.0, 30.0);
  std::uniform_real_distribution<double> vol(0.1, 4.0);
  std::uniform_int_distribution<int> pick(0, 4);
  Topology t = Topology::single_link(2.0);
  const LinkId l = t.path(0, 1)[0];
  StepFunction reserved;
  for (RequestId id = 0; id < 300; ++id) {
    const double a = when(rng);
    const double v = vol(rng);
    const Request r = req(id, 0, 1, v, a, a + v / 0.2, 0.8);
    const StepFunction before = t.link(l).remaining;
    const Decision d = centralized_reserve(t, kSchemes[pick(rng)], r);
    reserved = add(reserved, d.reservation());
    const StepFunction& after = t.link(l).remaining;
    for (double p : probe_points({&before, &after})) CHECK(after(p) <= before(p));
    CHECK(within_capacity(t.link(l)));
  }
  CHECK(leq(reserved, StepFunction::heaviside(0, 2.0), 1e-9));
  for (double p : probe_points({&reserved})) {
    if (p >= 0) CHECK(reserved(p) + t.link(l).remaining(p) == doctest::Approx(2.0));
  }
}
