#include <doctest.h>

#include <random>

#include "support.hpp"
#include "uamn/dro.hpp"
#include "uamn/oracle.hpp"

using namespace uamn;
using namespace uamn::testing;

namespace {

NetworkSpec parallel_spec() {
  NetworkSpec s;
  s.name = "parallel";
  s.channel_types = {"standard"};
  s.nodes = {node("o"), node("m"), node("d")};
  s.arcs = {arc(0, 2, 1.0, 4.0, 1.0, {2.0}), arc(0, 1, 1.0, 100.0, 1.0, {1.0}), arc(1, 2, 1.0, 100.0, 1.0, {2.0})};
  s.od_pairs = {pair(s, 0, 2)};
  return s;
}

}  // namespace

TEST_CASE("dense LP: both methods agree on a small problem") {
  oracle::DenseLp lp;
  lp.cost = {1.0, 2.0, 0.0};
  lp.eq = {{1.0, 1.0, 0.0}};
  lp.eq_rhs = {4.0};
  lp.ineq = {{1.0, 0.0, 1.0}};
  lp.ineq_rhs = {3.0};
  const auto a = oracle::solve_dense(lp, oracle::LpMethod::kVertexEnum);
  const auto b = oracle::solve_dense(lp, oracle::LpMethod::kSimplex);
  REQUIRE(a.feasible);
  REQUIRE(b.feasible);
  CHECK(a.value == doctest::Approx(5.0));
  CHECK(b.value == doctest::Approx(5.0));
  lp.ineq_rhs = {-1.0};
  CHECK_FALSE(oracle::solve_dense(lp, oracle::LpMethod::kSimplex).feasible);
  CHECK_FALSE(oracle::solve_dense(lp, oracle::LpMethod::kVertexEnum).feasible);
}

TEST_CASE("oracle second stage: single arc and a capacity split") {
  NetworkSpec s;
  s.channel_types = {"standard"};
  s.nodes = {node("o"), node("d")};
  s.arcs = {arc(0, 1, 1.0, 100.0, 1.0, {2.0})};
  s.od_pairs = {pair(s, 0, 1)};
  const std::vector<double> b{10.0};
  CHECK(oracle::oracle_second_stage(s, full_design(s), b, BatteryRhsMode::kLiteral, 40.0) == doctest::Approx(20.0));

  // Direct arc (cost 2, capacity 4) then the relay (cost 3): 4*2 + 6*3.
  const NetworkSpec p = parallel_spec();
  CHECK(oracle::oracle_second_stage(p, full_design(p), b, BatteryRhsMode::kFlowWeighted, 40.0) ==
        doctest::Approx(26.0));
  Design no_relay = full_design(p);
  no_relay.channel_count(ArcId(1), ChannelTypeId(0)) = 0;
  CHECK(std::isinf(oracle::oracle_second_stage(p, no_relay, b, BatteryRhsMode::kFlowWeighted, 40.0)));
}

TEST_CASE("oracle worst case for one pair") {
  NetworkSpec s;
  s.channel_types = {"standard"};
  s.nodes = {node("o"), node("d")};
  s.arcs = {arc(0, 1, 1.0, 100.0, 1.0, {2.0})};
  s.od_pairs = {pair(s, 0, 1)};
  const std::vector<double> ref{10.0}, lo{4.0}, hi{20.0};
  oracle::WorstCase w = oracle::oracle_worst_case(s, full_design(s), ref, 1.0, lo, hi, BatteryRhsMode::kLiteral, 50.0);
  CHECK(w.pattern == 1);
  CHECK(w.value == doctest::Approx(40.0 - 10.0));
  w = oracle::oracle_worst_case(s, full_design(s), ref, 3.0, lo, hi, BatteryRhsMode::kLiteral, 50.0);
  CHECK(w.pattern == 0);
  CHECK(w.value == doctest::Approx(20.0));
  // No penalty: the upper bound wins.
  w = oracle::oracle_worst_case(s, full_design(s), ref, 0.0, lo, hi, BatteryRhsMode::kLiteral, 50.0);
  CHECK(w.demand == hi);
}

TEST_CASE("engine and oracle second stage agree on random demand") {
  std::mt19937_64 rng(41);
  int compared = 0;
  for (int t = 0; t < 60; ++t) {
    const RandomInstance r = random_instance(rng);
    const Design d = full_design(r.spec);
    const double m = suggest_big_M(r.spec, r.demand);
    for (const auto& b : r.demand.samples) {
      const double engine = second_stage_value(r.spec, d, b, r.config.battery, m).value;
      const double reference = oracle::oracle_second_stage(r.spec, d, b, r.config.battery, m);
      CHECK(close_rel(engine, reference, 1e-6));
      if (std::isfinite(engine)) ++compared;
    }
  }
  CHECK(compared > 20);
}

TEST_CASE("engine and oracle worst cases agree on random instances") {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 40; ++t) {
    const RandomInstance r = random_instance(rng);
    const Design d = full_design(r.spec);
    const double m = suggest_big_M(r.spec, r.demand);
    RecourseEvaluator eval(r.spec, d, r.config.battery, m);
    for (const auto& b : r.demand.samples) {
      const WorstCaseEntry e = worst_case_sample(eval, b, r.config.beta, r.demand.lower, r.demand.upper);
      const oracle::WorstCase o =
          oracle::oracle_worst_case(r.spec, d, b, r.config.beta, r.demand.lower, r.demand.upper, r.config.battery, m);
      CHECK(close_rel(e.value, o.value, 1e-6));
    }
  }
}

TEST_CASE("oracle design picks the only feasible design") {
  NetworkSpec s;
  s.channel_types = {"standard"};
  s.nodes = {node("o", 1000.0, 7.0, 0.5), node("d", 1000.0, 3.0, 0.5)};
  s.arcs = {arc(0, 1, 1.0, 100.0, 10.0, {2.0})};
  s.od_pairs = {pair(s, 0, 1)};
  DemandModel dm;
  dm.lower = {10.0};
  dm.upper = {10.0};
  dm.samples = {{10.0}};
  dm.sample_labels = {"s1"};
  DroConfig c;
  const SolveReport r = oracle::oracle_design(s, dm, c);
  REQUIRE(r.feasible);
  // 10 fixed + 1000 capacity + 10 channel + 20 transport.
  CHECK(r.objective == doctest::Approx(10.0 + 1000.0 + 10.0 + 20.0));
  CHECK(r.design.channels == std::vector<int>{1});
}

TEST_CASE("engine and oracle agree at zero radius") {
  std::mt19937_64 rng(47);
  int partial = 0;
  for (int t = 0; t < 60; ++t) {
    RandomInstance r = random_instance(rng);
    r.config.theta = 0.0;
    const SolveReport e = solve_enumeration(r.spec, r.demand, r.config);
    const SolveReport o = oracle::oracle_design(r.spec, r.demand, r.config);
    REQUIRE(e.feasible == o.feasible);
    if (!e.feasible) continue;
    CHECK(e.design == o.design);
    CHECK(close_rel(e.objective, o.objective, 1e-6));
    // Count instances where the box is not fully feasible for the chosen design.
    const double m = suggest_big_M(r.spec, r.demand);
    if (std::isinf(oracle::oracle_second_stage(r.spec, e.design, r.demand.upper, r.config.battery, m))) ++partial;
  }
  CHECK(partial > 0);
}
