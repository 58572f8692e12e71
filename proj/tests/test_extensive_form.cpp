#include <doctest.h>

#include <random>

#include "support.hpp"
#include "uamn/dro.hpp"
#include "uamn/extensive_form.hpp"

using namespace uamn;
using namespace uamn::testing;

namespace {

NetworkSpec single_arc(double ct = 2.0, double capacity = 100.0) {
  NetworkSpec s;
  s.name = "single";
  s.channel_types = {"standard"};
  s.nodes = {node("o"), node("d")};
  s.arcs = {arc(0, 1, 1.0, capacity, 10.0, {ct})};
  s.od_pairs = {pair(s, 0, 1)};
  return s;
}

}  // namespace

TEST_CASE("single arc: incidence and demand right-hand side") {
  const NetworkSpec s = single_arc();
  const std::vector<double> b{10.0};
  const ExtensiveForm f = build_extensive_form(s, full_design(s), b, BatteryRhsMode::kLiteral, 40.0);
  REQUIRE(f.eq.num_rows() == 2);
  CHECK(f.eq.at(0, 0) == 1.0);
  CHECK(f.eq.at(1, 0) == -1.0);
  CHECK(f.eq_rhs == std::vector<double>{10.0, -10.0});
  CHECK(f.cost == std::vector<double>{2.0});
}

TEST_CASE("airport row is the capacity when open and big-M when closed") {
  const NetworkSpec s = single_arc();
  Design d = full_design(s);
  const std::vector<double> b{10.0};
  ExtensiveForm f = build_extensive_form(s, d, b, BatteryRhsMode::kLiteral, 40.0);
  CHECK(f.ineq_rhs[f.airport_row(0)] == 1000.0);
  d.open[0] = 0;
  f = build_extensive_form(s, d, b, BatteryRhsMode::kLiteral, 40.0);
  CHECK(f.ineq_rhs[f.airport_row(0)] == 40.0);
}

TEST_CASE("literal battery right-hand side on the triangle fixture") {
  const io::Instance inst = load("obs2_triangle.json");
  const Design d = full_design(inst.spec);
  const std::vector<double> b{50.0, 50.0, 50.0};
  const ExtensiveForm f =
      build_extensive_form(inst.spec, d, b, BatteryRhsMode::kLiteral, suggest_big_M(inst.spec, inst.demand));
  // Every arc's tail is open, so the tail sum is the arc count.
  const double expected = 50.0 * inst.spec.battery_boost * static_cast<double>(inst.spec.num_arcs());
  CHECK(expected == 7000.0);
  for (std::size_t k = 0; k < 3; ++k) CHECK(f.ineq_rhs[f.battery_row(k)] == expected);
  const ExtensiveForm g =
      build_extensive_form(inst.spec, d, b, BatteryRhsMode::kNodeSum, suggest_big_M(inst.spec, inst.demand));
  CHECK(g.ineq_rhs[g.battery_row(0)] == 50.0 * 20.0 * 5.0);
}

TEST_CASE("shape of the form") {
  const io::Instance inst = load("case_study.json");
  const Design d = full_design(inst.spec);
  const ExtensiveForm f = build_extensive_form(inst.spec, d, inst.demand.samples[0], BatteryRhsMode::kFlowWeighted,
                                               suggest_big_M(inst.spec, inst.demand));
  const std::size_t V = inst.spec.num_nodes(), A = inst.spec.num_arcs(), K = inst.spec.num_pairs();
  CHECK(f.cost.size() == K * A);
  CHECK(f.eq.num_rows() == K * V);
  CHECK(f.ineq.num_rows() == A + V + K);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t a = 0; a < A; ++a) {
      CHECK(f.columns[f.column(k, a)].pair.value() == k);
      CHECK(f.columns[f.column(k, a)].arc.value() == a);
    }
  }
}

TEST_CASE("each pair's equality rows telescope to zero") {
  const io::Instance inst = load("case_study.json");
  const ExtensiveForm f = build_extensive_form(inst.spec, full_design(inst.spec), inst.demand.samples[0],
                                               BatteryRhsMode::kFlowWeighted, 350.0);
  const std::size_t K = inst.spec.num_pairs();
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> sum(f.cost.size(), 0.0);
    double rhs = 0.0;
    for (std::size_t r = 0; r < f.eq.num_rows(); ++r) {
      if (f.eq_rows[r].pair != k) continue;
      for (const auto& e : f.eq.rows[r]) sum[e.col] += e.value;
      rhs += f.eq_rhs[r];
    }
    for (double v : sum) CHECK(v == 0.0);
    CHECK(rhs == 0.0);
  }
}

TEST_CASE("residuals of zero flow and of a perturbed optimum") {
  const io::Instance inst = load("obs1_left.json");
  const Design d = full_design(inst.spec);
  const auto& b = inst.demand.samples[0];
  const ExtensiveForm f = build_extensive_form(inst.spec, d, b, BatteryRhsMode::kFlowWeighted, 1000.0);
  const std::vector<double> zero(f.cost.size(), 0.0);
  CHECK(evaluate_constraints(f, zero).equality == doctest::Approx(std::max(b[0], b[1])));

  const SecondStageResult q = second_stage_value(inst.spec, d, b, BatteryRhsMode::kFlowWeighted, 1000.0);
  REQUIRE(q.feasible());
  const ResidualReport ok = evaluate_constraints(f, q.flows);
  CHECK(ok.worst() <= 1e-7);
  std::vector<double> x = q.flows;
  x[f.column(0, 0)] += 0.25;  // arc 1->3 appears with +1 and -1 in pair 0's block
  CHECK(evaluate_constraints(f, x).equality == doctest::Approx(0.25));
}

TEST_CASE("second-stage value is convex and nondecreasing with a demand-free battery row") {
  const io::Instance inst = load("obs2_triangle.json");
  const Design d = full_design(inst.spec);
  RecourseEvaluator eval(inst.spec, d, BatteryRhsMode::kFlowWeighted, 1000.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 40; ++t) {
    std::vector<double> b(3), c(3), mid(3);
    for (std::size_t k = 0; k < 3; ++k) {
      const double lo = inst.demand.lower[k], hi = inst.demand.upper[k];
      b[k] = lo + (hi - lo) * u(rng);
      c[k] = b[k] + (hi - b[k]) * u(rng);
      mid[k] = 0.5 * (b[k] + c[k]);
    }
    const double qb = eval.value(b), qc = eval.value(c), qm = eval.value(mid);
    CHECK(qb <= qc + 1e-7);
    CHECK(qm <= 0.5 * (qb + qc) + 1e-7);
  }
}

TEST_CASE("demand of the wrong length is rejected") {
  const NetworkSpec s = single_arc();
  const std::vector<double> b{1.0, 2.0};
  CHECK_THROWS_AS(build_extensive_form(s, full_design(s), b, BatteryRhsMode::kLiteral, 10.0), DimensionError);
}

TEST_CASE("LP text names every row") {
  const NetworkSpec s = single_arc();
  const std::vector<double> b{10.0};
  const ExtensiveForm f = build_extensive_form(s, full_design(s), b, BatteryRhsMode::kLiteral, 40.0);
  const std::string text = to_lp_text(f, s);
  CHECK(text.find("Minimize") != std::string::npos);
  CHECK(text.find("battery_") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);
}
