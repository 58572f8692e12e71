// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "uamn/dro.hpp"
#include "uamn/oracle.hpp"

using namespace uamn;
using namespace uamn::testing;

namespace {

const std::vector<std::string> kFixtures = {
    "obs1_left.json",         "obs1_right.json",          "obs2_triangle.json",       "obs2_battery.json",
    "obs2_channel_cost.json", "obs2_transport_cost.json", "obs3_row1_mean50.json",    "obs3_row1_mean300.json",
    "obs3_row2_sd10.json",    "obs3_row2_sd100.json",     "obs4_positive_bound.json", "obs4_zero_bound.json",
    "case_study.json"};

// Collects failure notes for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) notes_.push_back(what);
  }
  bool passed() const { return notes_.empty(); }
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  std::vector<std::string> notes_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// "open 1 2 3 5; channels 1->3 3->2 5->2" using node names.
std::string signature(const NetworkSpec& spec, const Design& d) {
  std::ostringstream s;
  s << "open";
  for (std::size_t i = 0; i < spec.num_nodes(); ++i) {
    if (d.open[i]) s << ' ' << spec.nodes[i].name;
  }
  s << "; channels";
  const std::size_t T = spec.num_channel_types();
  for (std::size_t a = 0; a < spec.num_arcs(); ++a) {
    for (std::size_t t = 0; t < T; ++t) {
      const int y = d.channels[a * T + t];
      if (y == 0) continue;
      s << ' ' << spec.nodes[spec.arcs[a].tail.value()].name << "->" << spec.nodes[spec.arcs[a].head.value()].name;
      if (y > 1) s << 'x' << y;
    }
  }
  return s.str();
}

struct Solved {
  io::Instance instance;
  SolveReport report;
  double seconds = 0.0;
};

Solved solve_fixture(const std::string& name) {
  Solved s{load(name), {}, 0.0};
  const auto start = std::chrono::steady_clock::now();
  s.report = solve_enumeration(s.instance.spec, s.instance.demand, config_from(s.instance));
  s.seconds = seconds_since(start);
  return s;
}

void expect_design(Check& c, const std::string& fixture, const std::string& expected, double time_limit = 0.0) {
  const Solved s = solve_fixture(fixture);
  c.expect(s.report.feasible, fixture + ": infeasible");
  const std::string got = signature(s.instance.spec, s.report.design);
  c.expect(got == expected, fixture + ": got \"" + got + "\", expected \"" + expected + "\"");
  if (time_limit > 0.0) {
    c.expect(s.seconds < time_limit, fixture + ": " + std::to_string(s.seconds) + " s over the limit");
  }
}

const std::string kNode3Design = "open 1 2 3 5; channels 1->3 3->2 5->2";
const std::string kNode4Design = "open 1 2 4 5; channels 1->4 4->2 5->2";
const std::string kTriangle = "open 1 2 5; channels 1->2 1->5 2->5";
const std::string kHubAndSpoke = "open 1 2 3 5; channels 1->3 2->3 3->2 3->5";

void criterion1(Check& c) {
  expect_design(c, "obs1_left.json", kNode3Design, 60.0);
  expect_design(c, "obs1_right.json", kNode4Design, 60.0);
}

void criterion2(Check& c) {
  expect_design(c, "obs2_triangle.json", kTriangle);
  expect_design(c, "obs2_channel_cost.json", kHubAndSpoke);
  expect_design(c, "obs2_transport_cost.json", kHubAndSpoke);
  expect_design(c, "obs2_battery.json", kHubAndSpoke);
}

void criterion3(Check& c) {
  // Mean sweep: 50 -> 300 at sd 10.  Spread sweep: sd 10 -> 100 at mean 300.
  expect_design(c, "obs3_row1_mean50.json", kNode3Design);
  expect_design(c, "obs3_row1_mean300.json", kNode4Design);
  expect_design(c, "obs3_row2_sd10.json", kNode3Design);
  expect_design(c, "obs3_row2_sd100.json", kNode4Design);

  // Below the switch the design holds when the first pair's demand is rescaled.
  const io::Instance base = load("obs3_row1_mean50.json");
  for (double f : {0.5, 0.8, 1.2, 1.6, 2.0}) {
    io::Instance inst = base;
    inst.demand.lower[0] *= f;
    inst.demand.upper[0] *= f;
    for (auto& s : inst.demand.samples) s[0] *= f;
    const SolveReport r = solve_enumeration(inst.spec, inst.demand, config_from(inst));
    const std::string got = signature(inst.spec, r.design);
    c.expect(got == kNode3Design, "scale " + std::to_string(f) + ": got \"" + got + "\"");
  }
}

void criterion4(Check& c) {
  const Solved pos = solve_fixture("obs4_positive_bound.json");
  const Solved zero = solve_fixture("obs4_zero_bound.json");
  c.expect(pos.report.feasible && pos.report.design.open[2] == 1, "positive bound: node 3 not open");
  c.expect(zero.report.feasible && zero.report.design.open[2] == 0, "zero bound: node 3 open");
  expect_design(c, "obs4_positive_bound.json", kNode3Design);
  expect_design(c, "obs4_zero_bound.json", kNode4Design);
}

// Reference worst-case demand for the case study (pairs x dates).
const std::vector<std::vector<double>> kReferenceWorstCase = {
    {0.4, 3.1, 4.6, 3.1, 1.3, 25, 1.5},   {4.3, 4.2, 4.4, 4.93, 5.2, 25, 8.4}, {1.3, 1.2, 1.4, 0, 0.8, 25, 0.5},
    {5.2, 9.9, 5.5, 5.9, 0.5, 25, 12.7}, {1, 7, 4.2, 4.5, 25, 0, 0},           {0, 4.8, 0, 5.1, 0, 25, 3.6},
    {0, 5.2, 0, 2.4, 25, 25, 5.5}};

std::string classify(double value, double sample, double lower, double upper) {
  if (value == sample) return "sample";
  if (value == upper) return "upper";
  if (value == lower) return "lower";
  return "other";
}

void criterion5(Check& c) {
  const Solved s = solve_fixture("case_study.json");
  const NetworkSpec& spec = s.instance.spec;
  const DemandModel& dm = s.instance.demand;
  c.expect(s.report.feasible, "infeasible");
  c.expect(s.seconds < 600.0, "runtime " + std::to_string(s.seconds) + " s");
  if (!s.report.feasible) return;

  const auto candidate = spec.find_node("Candidate Point");
  const auto zheyi = spec.find_node("Zheyi Blood Station");
  const auto xiasha = spec.find_node("Xiasha Wu Mart");
  const auto xiasha_pair = spec.find_pair("Xiasha Wu Mart");
  c.expect(candidate && zheyi && xiasha && xiasha_pair, "missing named nodes or pair");
  if (!(candidate && zheyi && xiasha && xiasha_pair)) return;
  c.expect(!s.report.design.open[candidate->value()], "candidate point open");
  c.expect(s.report.design.open[zheyi->value()], "Zheyi closed");

  // Every unit leaving Xiasha goes to Zheyi, in every worst case.
  const std::size_t A = spec.num_arcs();
  const std::size_t k = xiasha_pair->value();
  for (std::size_t j = 0; j < s.report.certificate.size(); ++j) {
    const WorstCaseEntry& e = s.report.certificate[j];
    double out = 0.0, to_zheyi = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
      if (spec.arcs[a].tail != *xiasha) continue;
      const double x = e.flows[k * A + a];
      out += x;
      if (spec.arcs[a].head == *zheyi) to_zheyi += x;
    }
    c.expect(std::abs(out - e.demand[k]) <= 1e-6, "date " + dm.sample_labels[j] + ": Xiasha outflow differs from demand");
    c.expect(std::abs(to_zheyi - out) <= 1e-6, "date " + dm.sample_labels[j] + ": Xiasha flow bypasses Zheyi");
  }

  for (std::size_t p = 0; p < spec.num_pairs(); ++p) {
    for (std::size_t j = 0; j < dm.num_samples(); ++j) {
      const double sample = dm.samples[j][p];
      const std::string want = classify(kReferenceWorstCase[p][j], sample, dm.lower[p], dm.upper[p]);
      const std::string got = classify(s.report.certificate[j].demand[p], sample, dm.lower[p], dm.upper[p]);
      c.expect(want == got, spec.od_pairs[p].name + " on " + dm.sample_labels[j] + ": got " + got + ", expected " + want);
    }
  }
}

void criterion6(Check& c) {
  std::mt19937_64 rng(2024);
  int finite = 0;
  for (int t = 0; t < 100; ++t) {
    const RandomInstance r = random_instance(rng, {4, 2, 3});
    const Design d = full_design(r.spec);
    RecourseEvaluator eval(r.spec, d, r.config.battery, suggest_big_M(r.spec, r.demand));
    for (const auto& b : r.demand.samples) {
      const WorstCaseEntry p =
          worst_case_sample(eval, b, r.config.beta, r.demand.lower, r.demand.upper, WorstCaseStrategy::kPrimalEnum);
      const WorstCaseEntry q =
          worst_case_sample(eval, b, r.config.beta, r.demand.lower, r.demand.upper, WorstCaseStrategy::kDualEnum);
      const std::string where = "instance " + std::to_string(t);
      c.expect(close_rel(p.value, q.value, 1e-6), where + ": primal " + std::to_string(p.value) + " dual " +
                                                       std::to_string(q.value));
      for (const WorstCaseEntry* e : {&p, &q}) {
        if (e->demand.empty()) continue;
        for (std::size_t k = 0; k < b.size(); ++k) {
          const double v = e->demand[k];
          c.expect(v == b[k] || v == r.demand.lower[k] || v == r.demand.upper[k], where + ": component off the vertex set");
        }
      }
      if (std::isfinite(p.value)) ++finite;
    }
  }
  c.expect(finite >= 50, "too few feasible worst cases: " + std::to_string(finite));
}

void criterion7(Check& c) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const std::size_t G = 3 + t % 6;
    std::vector<double> grid(G), q(G);
    double x = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      x += 0.5 + std::round(40.0 * u(rng)) / 10.0;
      grid[g] = x;
      q[g] = std::round(1000.0 * u(rng)) / 10.0;
    }
    std::vector<std::size_t> samples(1 + t % 4);
    for (auto& s : samples) s = static_cast<std::size_t>(rng() % G);
    const double diameter = grid.back() - grid.front();
    const double theta = t == 0 ? 0.0 : t == 1 ? diameter : t == 2 ? 3.0 * diameter : diameter * u(rng);
    const DualityCheckResult r = duality_gap_check(grid, q, samples, theta);
    const std::string where = "grid " + std::to_string(t) + " theta " + std::to_string(theta);
    c.expect(close_rel(r.lhs, r.rhs, 1e-6), where + ": lhs " + std::to_string(r.lhs) + " rhs " + std::to_string(r.rhs));
    if (theta == 0.0) {
      double mean = 0.0;
      for (auto s : samples) mean += q[s] / static_cast<double>(samples.size());
      c.expect(close_rel(r.lhs, mean, 1e-9), where + ": zero radius is not the sample mean");
    }
    if (theta >= diameter) {
      c.expect(close_rel(r.lhs, *std::max_element(q.begin(), q.end()), 1e-9), where + ": full radius is not the max");
    }
  }
}

void compare_with_oracle(Check& c, const std::string& where, const NetworkSpec& spec, const DemandModel& dm,
                         const DroConfig& config) {
  const SolveReport e = solve_enumeration(spec, dm, config);
  const SolveReport o = oracle::oracle_design(spec, dm, config);
  c.expect(e.feasible == o.feasible, where + ": feasibility differs");
  if (!e.feasible || !o.feasible) return;
  c.expect(e.design == o.design, where + ": designs differ (" + signature(spec, e.design) + " vs " +
                                     signature(spec, o.design) + ")");
  c.expect(close_rel(e.objective, o.objective, 1e-6),
           where + ": objectives " + std::to_string(e.objective) + " vs " + std::to_string(o.objective));
}

void criterion8(Check& c) {
  for (const auto& name : kFixtures) {
    const io::Instance inst = load(name);
    compare_with_oracle(c, name, inst.spec, inst.demand, config_from(inst));
  }
  std::mt19937_64 rng(8);
  int feasible = 0;
  for (int t = 0; t < 100; ++t) {
    const RandomInstance r = random_instance(rng, {4, 2, 3});
    compare_with_oracle(c, "random " + std::to_string(t), r.spec, r.demand, r.config);
    if (solve_enumeration(r.spec, r.demand, r.config).feasible) ++feasible;
  }
  c.expect(feasible >= 50, "too few feasible random instances: " + std::to_string(feasible));
}

void criterion9(Check& c) {
  for (const auto& name : kFixtures) {
    const io::Instance inst = load(name);
    const SolveReport e = solve_enumeration(inst.spec, inst.demand, config_from(inst));
    const SolveReport l = solve_lagrangian(inst.spec, inst.demand, config_from(inst, SolverMode::kLagrangian));
    c.expect(l.feasible, name + ": no feasible incumbent");
    if (!l.feasible || !e.feasible) continue;
    c.expect(l.objective <= e.objective * 1.01 + 1e-9,
             name + ": incumbent " + std::to_string(l.objective) + " vs optimum " + std::to_string(e.objective));
    const auto& d = l.diagnostics;
    c.expect(d.violation <= 1e-5 || !d.converged,
             name + ": converged with violation " + std::to_string(d.violation));
  }
}

void criterion10(Check& c) {
  auto reduce = [&](const std::string& where, const NetworkSpec& spec, const DemandModel& dm, DroConfig base) {
    DroConfig dro = base;
    dro.mode = SolverMode::kVertexEnum;
    dro.theta = 0.0;
    dro.beta = beta_saturation(spec);
    DroConfig saa = base;
    saa.mode = SolverMode::kSaa;
    const SolveReport a = solve_enumeration(spec, dm, dro);
    const SolveReport b = solve_enumeration(spec, dm, saa);
    c.expect(a.feasible == b.feasible, where + ": SAA feasibility differs");
    if (a.feasible && b.feasible) {
      c.expect(a.design == b.design, where + ": SAA design differs");
      c.expect(close_rel(a.objective, b.objective, 1e-9), where + ": SAA objective " + std::to_string(a.objective) +
                                                              " vs " + std::to_string(b.objective));
    }

    // One sample, zero radius, penalty chosen by the solver.
    DemandModel one = dm;
    one.samples = {dm.samples[0]};
    one.sample_labels = {dm.sample_labels.empty() ? "s1" : dm.sample_labels[0]};
    DroConfig single = dro;
    single.beta_mode = BetaMode::kSearch;
    DroConfig det = base;
    det.mode = SolverMode::kDeterministic;
    const SolveReport s = solve_enumeration(spec, one, single);
    const SolveReport d = solve_enumeration(spec, one, det);
    c.expect(s.feasible == d.feasible, where + ": deterministic feasibility differs");
    if (s.feasible && d.feasible) {
      c.expect(s.design == d.design, where + ": deterministic design differs");
      c.expect(close_rel(s.objective, d.objective, 1e-9), where + ": deterministic objective " +
                                                              std::to_string(s.objective) + " vs " +
                                                              std::to_string(d.objective));
    }
  };
  for (const auto& name : kFixtures) {
    const io::Instance inst = load(name);
    reduce(name, inst.spec, inst.demand, config_from(inst));
  }
  std::mt19937_64 rng(10);
  for (int t = 0; t < 30; ++t) {
    const RandomInstance r = random_instance(rng, {4, 2, 3});
    reduce("random " + std::to_string(t), r.spec, r.demand, r.config);
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"1 transfer-airport switch", criterion1},
      {"2 triangle vs hub-and-spoke", criterion2},
      {"3 mean and spread robustness", criterion3},
      {"4 zero-history pair bound", criterion4},
      {"5 case study routing and worst-case table", criterion5},
      {"6 vertex structure and primal/dual agreement", criterion6},
      {"7 penalty identity on small grids", criterion7},
      {"8 oracle agreement", criterion8},
      {"9 Lagrangian quality", criterion9},
      {"10 reductions", criterion10},
  };
  // Optional argument: run only the criteria whose numbers are listed, e.g. "1,5".
  std::vector<std::string> only;
  if (argc > 1) {
    std::stringstream list(argv[1]);
    for (std::string item; std::getline(list, item, ',');) only.push_back(item);
  }

  int failed = 0;
  for (const auto& [label, run] : criteria) {
    const std::string number = label.substr(0, label.find(' '));
    if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
    Check c;
    const auto start = std::chrono::steady_clock::now();
    try {
      run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(start);
    std::cout << (c.passed() ? "PASS" : "FAIL") << "  criterion " << label << "  (" << secs << " s)\n";
    for (const auto& note : c.notes()) std::cout << "      " << note << "\n";
    std::cout.flush();
    if (!c.passed()) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
