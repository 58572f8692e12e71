#include <doctest.h>

#include <random>

#include "support.hpp"
#include "uamn/model.hpp"

using namespace uamn;
using namespace uamn::testing;

TEST_CASE("bundled five-node fixture validates cleanly") {
  const io::Instance inst = load("obs1_left.json");
  CHECK(validate_instance(inst.spec, inst.demand).empty());
}

TEST_CASE("sample above its upper bound names the pair") {
  io::Instance inst = load("obs1_left.json");
  inst.demand.upper[0] = 25.0;
  inst.demand.lower[0] = 0.0;
  inst.demand.samples[0][0] = 30.0;
  inst.demand.samples[1][0] = 20.0;
  const auto issues = validate_instance(inst.spec, inst.demand);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].subject.find(inst.spec.od_pairs[0].name) != std::string::npos);
}

TEST_CASE("zero channel capacity gives one diagnostic") {
  io::Instance inst = load("obs1_left.json");
  inst.spec.arcs[2].channels[0].capacity = 0.0;
  const auto issues = validate_instance(inst.spec, inst.demand);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].subject == arc_label(inst.spec, ArcId(2)));
}

TEST_CASE("validation is idempotent") {
  io::Instance inst = load("obs2_triangle.json");
  inst.spec.nodes[0].airport_capacity = -1.0;
  inst.demand.samples.clear();
  inst.demand.sample_labels.clear();
  const io::Instance copy = inst;
  const auto a = validate_instance(inst.spec, inst.demand);
  const auto b = validate_instance(inst.spec, inst.demand);
  CHECK(a == b);
  CHECK(a.size() == 2);
  CHECK(inst == copy);
}

TEST_CASE("big-M is twice the sum of upper bounds") {
  NetworkSpec spec;
  DemandModel d;
  d.upper = {10.0, 15.0};
  CHECK(suggest_big_M(spec, d) == 50.0);
  d.upper = {0.0};
  CHECK(suggest_big_M(spec, d) == 0.0);
  const io::Instance cs = load("case_study.json");
  CHECK(suggest_big_M(cs.spec, cs.demand) == 350.0);
}

TEST_CASE("big-M is monotone in every upper bound") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  NetworkSpec spec;
  for (int t = 0; t < 100; ++t) {
    DemandModel d;
    d.upper = {u(rng), u(rng), u(rng)};
    const double base = suggest_big_M(spec, d);
    d.upper[t % 3] += u(rng);
    CHECK(suggest_big_M(spec, d) >= base);
  }
}

TEST_CASE("explicit big-M overrides the suggestion") {
  io::Instance inst = load("obs1_left.json");
  CHECK(effective_big_M(inst.spec, inst.demand) == suggest_big_M(inst.spec, inst.demand));
  inst.spec.big_m = 5000.0;
  CHECK(effective_big_M(inst.spec, inst.demand) == 5000.0);
}

TEST_CASE("investment cost adds channels, fixed costs and capacity costs of open nodes") {
  const io::Instance inst = load("obs1_left.json");
  Design d = Design::closed(inst.spec);
  d.open = {1, 1, 1, 0, 1};
  d.channel_count(ArcId(0), ChannelTypeId(0)) = 1;
  d.channel_count(ArcId(1), ChannelTypeId(0)) = 1;
  const InvestmentCost c = investment_cost(inst.spec, d);
  CHECK(c.channel == 3000.0);
  CHECK(c.infrastructure == 13000.0);
  CHECK(c.capacity == 500.0 + 500.0 + 600.0 + 500.0);
  CHECK(c.total() == c.channel + c.infrastructure + c.capacity);
  CHECK(d.arc_capacity(inst.spec, ArcId(0)) == 400.0);
  CHECK(d.arc_capacity(inst.spec, ArcId(2)) == 0.0);
}

TEST_CASE("designs order lexicographically on open flags then channels") {
  const io::Instance inst = load("obs1_left.json");
  Design a = Design::closed(inst.spec);
  Design b = a;
  b.channels[4] = 1;
  Design c = a;
  c.open[0] = 1;
  CHECK(a < b);
  CHECK(b < c);
  CHECK(a == Design::closed(inst.spec));
}
