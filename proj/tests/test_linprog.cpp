#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "uamn/linprog.hpp"

using namespace uamn::lp;

namespace {

// Dual objective -mu'B - lambda'E; valid when all variables are x >= 0 with no upper bounds.
double dual_objective(const LpProblem& p, const LpSolution& s) {
  double v = 0.0;
  for (std::size_t i = 0; i < p.equalities.size(); ++i) v -= s.eq_duals[i] * p.equalities[i].rhs;
  for (std::size_t i = 0; i < p.inequalities.size(); ++i) v -= s.ineq_duals[i] * p.inequalities[i].rhs;
  return v;
}

std::vector<double> dual_slack(const LpProblem& p, const LpSolution& s) {
  std::vector<double> r = p.objective;
  for (std::size_t i = 0; i < p.equalities.size(); ++i)
    for (const Term& t : p.equalities[i].terms) r[t.var] += s.eq_duals[i] * t.coef;
  for (std::size_t i = 0; i < p.inequalities.size(); ++i)
    for (const Term& t : p.inequalities[i].terms) r[t.var] += s.ineq_duals[i] * t.coef;
  return r;
}

// Feasible random LP: rows built around a known nonnegative point.
LpProblem random_lp(std::mt19937_64& rng, std::size_t n, std::size_t meq, std::size_t mineq) {
  std::uniform_real_distribution<double> u(-3.0, 3.0), pos(0.0, 4.0), cost(0.5, 5.0);
  LpProblem p;
  std::vector<double> x0(n);
  for (std::size_t j = 0; j < n; ++j) {
    p.add_var(cost(rng));
    x0[j] = pos(rng);
  }
  for (std::size_t i = 0; i < meq; ++i) {
    std::vector<Term> row;
    double rhs = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = std::round(u(rng));
      if (a == 0.0) continue;
      row.push_back({j, a});
      rhs += a * x0[j];
    }
    p.add_equality(row, rhs);
  }
  for (std::size_t i = 0; i < mineq; ++i) {
    std::vector<Term> row;
    double rhs = pos(rng);
    for (std::size_t j = 0; j < n; ++j) {
      const double a = std::round(u(rng));
      if (a == 0.0) continue;
      row.push_back({j, a});
      rhs += a * x0[j];
    }
    p.add_inequality(row, rhs);
  }
  return p;
}

}  // namespace

TEST_CASE("single equality: value, primal and equality dual") {
  LpProblem p;
  p.add_var(2.0);
  p.add_equality({{0, 1.0}}, 10.0);
  const LpSolution s = solve_lp(p);
  REQUIRE(s.optimal());
  CHECK(s.x[0] == doctest::Approx(10.0));
  CHECK(s.objective == doctest::Approx(20.0));
  CHECK(s.eq_duals[0] == doctest::Approx(-2.0));
}

TEST_CASE("conflicting equality and inequality is infeasible") {
  LpProblem p;
  p.add_var(1.0);
  p.add_equality({{0, 1.0}}, 10.0);
  p.add_inequality({{0, 1.0}}, 5.0);
  CHECK(solve_lp(p).status == LpStatus::kInfeasible);
}

TEST_CASE("upper bound conflicting with equality is infeasible") {
  LpProblem p;
  p.add_var(1.0, 0.0, 5.0);
  p.add_equality({{0, 1.0}}, 10.0);
  CHECK(solve_lp(p).status == LpStatus::kInfeasible);
}

TEST_CASE("unbounded direction is detected") {
  LpProblem p;
  p.add_var(-1.0);
  p.add_var(0.0);
  p.add_equality({{0, 1.0}, {1, -1.0}}, 1.0);
  CHECK(solve_lp(p).status == LpStatus::kUnbounded);
}

TEST_CASE("random LPs: strong duality and dual feasibility") {
  std::mt19937_64 rng(7);
  int optimal = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const LpProblem p = random_lp(rng, 6, 2, 4);
    const LpSolution s = solve_lp(p);
    REQUIRE(s.status != LpStatus::kInfeasible);
    REQUIRE(s.status != LpStatus::kNumericalFailure);
    if (!s.optimal()) continue;
    ++optimal;
    CHECK(s.objective == doctest::Approx(dual_objective(p, s)).epsilon(1e-6));
    for (double r : dual_slack(p, s)) CHECK(r >= -1e-7);
    for (double l : s.ineq_duals) CHECK(l >= -1e-9);
    // Complementary slackness on inequality rows.
    for (std::size_t i = 0; i < p.inequalities.size(); ++i) {
      double lhs = 0.0;
      for (const Term& t : p.inequalities[i].terms) lhs += t.coef * s.x[t.var];
      CHECK(s.ineq_duals[i] * (p.inequalities[i].rhs - lhs) == doctest::Approx(0.0).epsilon(1e-6));
    }
  }
  CHECK(optimal > 100);
}

TEST_CASE("scaling the objective scales the value") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    LpProblem p = random_lp(rng, 5, 1, 3);
    const LpSolution a = solve_lp(p);
    if (!a.optimal()) continue;
    for (double& c : p.objective) c *= 3.5;
    const LpSolution b = solve_lp(p);
    REQUIRE(b.optimal());
    CHECK(b.objective == doctest::Approx(3.5 * a.objective).epsilon(1e-9));
  }
}

TEST_CASE("warm-started right-hand-side sequence matches cold solves") {
  std::mt19937_64 rng(5);
  const LpProblem base = random_lp(rng, 6, 2, 3);
  RhsSequenceSolver seq(base);
  std::uniform_real_distribution<double> jitter(0.0, 2.0);
  for (int t = 0; t < 30; ++t) {
    LpProblem p = base;
    std::vector<double> eq, ineq;
    for (auto& r : p.equalities) eq.push_back(r.rhs);
    for (auto& r : p.inequalities) {
      r.rhs += jitter(rng);
      ineq.push_back(r.rhs);
    }
    const LpSolution cold = solve_lp(p);
    const LpSolution warm = seq.solve(eq, ineq);
    REQUIRE(cold.status == warm.status);
    if (cold.optimal()) CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-9));
  }
  CHECK(seq.solves() == 30);
}

TEST_CASE("branch and bound rounds a forced binary up") {
  LpProblem p;
  p.add_var(1.0, 0.0, 1.0);
  p.add_inequality({{0, -1.0}}, -0.3);
  const std::vector<std::size_t> ints{0};
  const LpSolution s = solve_bb(p, ints);
  REQUIRE(s.optimal());
  CHECK(s.x[0] == doctest::Approx(1.0));
}

TEST_CASE("branch and bound without integer variables equals the LP") {
  std::mt19937_64 rng(3);
  const LpProblem p = random_lp(rng, 5, 1, 3);
  const LpSolution a = solve_lp(p);
  const LpSolution b = solve_bb(p, {});
  REQUIRE(a.status == b.status);
  if (a.optimal()) CHECK(b.objective == doctest::Approx(a.objective));
}

TEST_CASE("branch and bound matches exhaustive enumeration") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> w(1.0, 9.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + trial % 6;
    // Knapsack: max value s.t. weight <= cap, binaries; min of -value.
    std::vector<double> value(n), weight(n);
    LpProblem p;
    std::vector<Term> row;
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      value[j] = std::round(w(rng));
      weight[j] = std::round(w(rng));
      total += weight[j];
      p.add_var(-value[j], 0.0, 1.0);
      row.push_back({j, weight[j]});
    }
    const double cap = std::round(total / 2.0);
    p.add_inequality(row, cap);
    double best = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      double v = 0.0, wt = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (mask >> j & 1) {
          v += value[j];
          wt += weight[j];
        }
      }
      if (wt <= cap) best = std::max(best, v);
    }
    std::vector<std::size_t> ints(n);
    for (std::size_t j = 0; j < n; ++j) ints[j] = j;
    const LpSolution s = solve_bb(p, ints);
    REQUIRE(s.optimal());
    CHECK(-s.objective == doctest::Approx(best));
    const LpSolution relax = solve_lp(p);
    CHECK(relax.objective <= s.objective + 1e-9);
  }
}
