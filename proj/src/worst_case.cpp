#include <algorithm>
#include <cmath>
#include <map>

#include "uamn/dro.hpp"

namespace uamn {

namespace {

bool ties(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) return a == b;
  return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
}

std::vector<double> all_plus(std::span<const double> upper) { return {upper.begin(), upper.end()}; }

}  // namespace

std::size_t VertexTable::argmax(double beta) const {
  std::size_t best = 0;
  double best_value = -lp::kInf;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const double v = vertices[i].recourse - beta * vertices[i].penalty;
    if (v > best_value && !ties(v, best_value)) {
      best = i;
      best_value = v;
    } else if (ties(v, best_value) && vertices[i].penalty < vertices[best].penalty) {
      best = i;
      best_value = v;
    }
  }
  return best;
}

VertexDomain vertex_domain(double theta) { return theta > 0.0 ? VertexDomain::kBox : VertexDomain::kFeasible; }

VertexTable build_vertex_table(RecourseEvaluator& eval, std::span<const double> reference,
                               std::span<const double> lower, std::span<const double> upper, VertexDomain domain) {
  const std::size_t K = reference.size();
  VertexTable table;
  // Feasibility is monotone over the demand box (every row is homogeneous
  // in a pair's flow and demand), so the all-plus vertex decides it.
  if (domain == VertexDomain::kBox && std::isinf(eval.value(all_plus(upper)))) {
    std::uint64_t plus_index = 0;
    for (std::size_t k = K; k-- > 0;) plus_index = plus_index * 3 + 1;
    table.infeasible_pattern = plus_index;
    return table;
  }
  std::map<std::vector<double>, bool> seen;
  const std::uint64_t count = pattern_count(K);
  for (std::uint64_t p = 0; p < count; ++p) {
    const VertexPattern pattern = decode_pattern(p, K);
    std::vector<double> b = pattern_demand(pattern, reference, lower, upper);
    if (!seen.emplace(b, true).second) continue;
    const double q = eval.value(b);
    if (std::isinf(q)) {
      if (domain == VertexDomain::kFeasible && p != 0) continue;
      table.infeasible_pattern = p;
      return table;
    }
    table.vertices.push_back({p, wasserstein_penalty(b, reference), q});
  }
  return table;
}

namespace {

WorstCaseEntry entry_from(RecourseEvaluator& eval, std::uint64_t pattern_index, std::span<const double> reference,
                          std::span<const double> lower, std::span<const double> upper, double beta) {
  WorstCaseEntry e;
  e.pattern = decode_pattern(pattern_index, reference.size());
  e.demand = pattern_demand(e.pattern, reference, lower, upper);
  e.penalty = wasserstein_penalty(e.demand, reference);
  SecondStageResult s = eval.solve(e.demand);
  e.recourse = s.value;
  e.value = s.value - beta * e.penalty;
  e.flows = std::move(s.flows);
  return e;
}

WorstCaseEntry infeasible_entry(std::uint64_t pattern_index, std::span<const double> reference,
                                std::span<const double> lower, std::span<const double> upper) {
  WorstCaseEntry e;
  e.infeasible = true;
  e.pattern = decode_pattern(pattern_index, reference.size());
  e.demand = pattern_demand(e.pattern, reference, lower, upper);
  e.penalty = wasserstein_penalty(e.demand, reference);
  return e;
}

}  // namespace

WorstCaseEntry worst_case_sample(RecourseEvaluator& eval, std::span<const double> reference, double beta,
                                 std::span<const double> lower, std::span<const double> upper,
                                 WorstCaseStrategy strategy, VertexDomain domain) {
  const std::size_t K = reference.size();
  if (lower.size() != K || upper.size() != K) throw DimensionError("worst_case_sample: bound dimension mismatch");
  if (strategy == WorstCaseStrategy::kAuto) {
    strategy = K <= 12 ? WorstCaseStrategy::kPrimalEnum : WorstCaseStrategy::kDualEnum;
  }
  if (strategy == WorstCaseStrategy::kPrimalEnum) {
    VertexTable table = build_vertex_table(eval, reference, lower, upper, domain);
    if (table.infeasible_pattern) return infeasible_entry(*table.infeasible_pattern, reference, lower, upper);
    const auto& v = table.vertices[table.argmax(beta)];
    return entry_from(eval, v.pattern_index, reference, lower, upper, beta);
  }

  // Dual route: each pattern's value from the dual LP with E evaluated at
  // the pattern's demand.
  std::map<std::vector<double>, bool> seen;
  const std::uint64_t count = pattern_count(K);
  std::uint64_t best = 0;
  double best_value = -lp::kInf;
  double best_penalty = 0.0;
  for (std::uint64_t p = 0; p < count; ++p) {
    const VertexPattern pattern = decode_pattern(p, K);
    std::vector<double> b = pattern_demand(pattern, reference, lower, upper);
    if (!seen.emplace(b, true).second) continue;
    const double q = eval.dual_value(b);
    if (std::isinf(q)) {
      if (domain == VertexDomain::kFeasible && p != 0) continue;
      return infeasible_entry(p, reference, lower, upper);
    }
    const double rho = linearized_penalty(pattern, reference, lower, upper);
    const double v = q - beta * rho;
    if ((v > best_value && !ties(v, best_value)) || (ties(v, best_value) && rho < best_penalty)) {
      best = p;
      best_value = v;
      best_penalty = rho;
    }
  }
  WorstCaseEntry e = entry_from(eval, best, reference, lower, upper, beta);
  // Report the dual-side value; the primal solve only supplies flows.
  e.recourse = best_value + beta * e.penalty;
  e.value = best_value;
  return e;
}

double beta_saturation(const NetworkSpec& spec) {
  double cmax = 0.0;
  for (const Arc& arc : spec.arcs) {
    for (double c : arc.transport_cost) cmax = std::max(cmax, c);
  }
  return cmax * static_cast<double>(spec.num_arcs()) * static_cast<double>(spec.num_pairs()) + 1.0;
}

double optimize_beta(std::span<const VertexTable> tables, double theta, double* best_value) {
  const double n = static_cast<double>(tables.size());
  auto f = [&](double beta) {
    double total = 0.0;
    for (const VertexTable& t : tables) {
      double m = -lp::kInf;
      for (const auto& v : t.vertices) m = std::max(m, v.recourse - beta * v.penalty);
      total += m;
    }
    return total / n + theta * beta;
  };
  // Beyond beta_hi every sample's maximiser is the sample itself.
  double beta_hi = 0.0;
  for (const VertexTable& t : tables) {
    const double q0 = t.vertices.front().recourse;
    for (const auto& v : t.vertices) {
      if (v.penalty > 0.0) beta_hi = std::max(beta_hi, (v.recourse - q0) / v.penalty);
    }
  }
  if (beta_hi <= 0.0) {
    if (best_value) *best_value = f(0.0);
    return 0.0;
  }
  std::vector<double> grid{0.0};
  for (int e = -12; e <= 0; ++e) grid.push_back(beta_hi * std::pow(10.0, e));
  grid.push_back(2.0 * beta_hi);
  std::size_t arg = 0;
  double fbest = f(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v < fbest) {
      fbest = v;
      arg = i;
    }
  }
  double lo = grid[arg == 0 ? 0 : arg - 1];
  double hi = grid[std::min(arg + 1, grid.size() - 1)];
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = f(x2);
    }
  }
  double beta = f1 <= f2 ? x1 : x2;
  double value = std::min(f1, f2);
  if (fbest < value) {
    beta = grid[arg];
    value = fbest;
  }
  if (best_value) *best_value = value;
  return beta;
}

// ---------------------------------------------------------------------------

ActiveInstance prune_inactive_pairs(const NetworkSpec& spec, const DemandModel& demand) {
  ActiveInstance out;
  out.spec = spec;
  out.spec.od_pairs.clear();
  out.demand.sample_labels = demand.sample_labels;
  out.demand.samples.assign(demand.samples.size(), {});
  for (std::size_t k = 0; k < spec.num_pairs(); ++k) {
    if (demand.lower[k] == 0.0 && demand.upper[k] == 0.0) continue;
    out.pair_map.push_back(k);
    out.spec.od_pairs.push_back(spec.od_pairs[k]);
    out.demand.lower.push_back(demand.lower[k]);
    out.demand.upper.push_back(demand.upper[k]);
    for (std::size_t j = 0; j < demand.samples.size(); ++j) out.demand.samples[j].push_back(demand.samples[j][k]);
  }
  for (std::size_t a = 0; a < spec.num_arcs(); ++a) {
    auto& costs = out.spec.arcs[a].transport_cost;
    costs.clear();
    for (std::size_t k : out.pair_map) costs.push_back(spec.arcs[a].transport_cost[k]);
  }
  return out;
}

namespace {

// Maps an entry over the active pairs back onto the original pair list.
WorstCaseEntry expand_entry(const WorstCaseEntry& e, const ActiveInstance& active, std::size_t num_pairs,
                            std::size_t num_arcs) {
  WorstCaseEntry out = e;
  out.demand.assign(num_pairs, 0.0);
  out.pattern.assign(num_pairs, PatternState::kZero);
  for (std::size_t i = 0; i < active.pair_map.size(); ++i) {
    out.demand[active.pair_map[i]] = e.demand[i];
    out.pattern[active.pair_map[i]] = e.pattern[i];
  }
  if (!e.flows.empty()) {
    out.flows.assign(num_pairs * num_arcs, 0.0);
    for (std::size_t i = 0; i < active.pair_map.size(); ++i) {
      for (std::size_t a = 0; a < num_arcs; ++a) {
        out.flows[active.pair_map[i] * num_arcs + a] = e.flows[i * num_arcs + a];
      }
    }
  }
  return out;
}

void check_design(const NetworkSpec& spec, const Design& design) {
  if (design.open.size() != spec.num_nodes() || design.num_types != spec.num_channel_types() ||
      design.channels.size() != spec.num_arcs() * spec.num_channel_types()) {
    throw DimensionError("design does not match the network dimensions");
  }
}

}  // namespace

DroEvaluation dro_objective(const NetworkSpec& spec, const DemandModel& demand, const Design& design,
                            const DroConfig& config) {
  check_design(spec, design);
  const ActiveInstance active = prune_inactive_pairs(spec, demand);
  RecourseEvaluator eval(active.spec, design, config.battery, effective_big_M(spec, demand), config.tol);
  const auto& samples = active.demand.samples;
  const double n = static_cast<double>(samples.size());
  const VertexDomain domain = vertex_domain(config.theta);

  DroEvaluation out;
  const InvestmentCost inv = investment_cost(spec, design);
  out.breakdown.channel = inv.channel;
  out.breakdown.infrastructure = inv.infrastructure;
  out.breakdown.capacity = inv.capacity;

  std::vector<WorstCaseEntry> entries;
  if (config.beta_mode == BetaMode::kSearch) {
    std::vector<VertexTable> tables;
    for (const auto& s : samples) {
      tables.push_back(build_vertex_table(eval, s, active.demand.lower, active.demand.upper, domain));
      if (tables.back().infeasible_pattern) {
        out.certificate.push_back(expand_entry(
            infeasible_entry(*tables.back().infeasible_pattern, s, active.demand.lower, active.demand.upper),
            active, spec.num_pairs(), spec.num_arcs()));
        out.lp_solves = eval.lp_solves();
        return out;
      }
    }
    out.beta = optimize_beta(tables, config.theta);
    for (std::size_t j = 0; j < samples.size(); ++j) {
      const auto& v = tables[j].vertices[tables[j].argmax(out.beta)];
      entries.push_back(entry_from(eval, v.pattern_index, samples[j], active.demand.lower, active.demand.upper,
                                   out.beta));
    }
  } else {
    out.beta = config.beta;
    for (const auto& s : samples) {
      entries.push_back(
          worst_case_sample(eval, s, config.beta, active.demand.lower, active.demand.upper, config.strategy, domain));
      if (entries.back().infeasible) {
        out.certificate.push_back(expand_entry(entries.back(), active, spec.num_pairs(), spec.num_arcs()));
        out.lp_solves = eval.lp_solves();
        return out;
      }
    }
  }
  double transport = 0.0, penalty = 0.0, worst = 0.0;
  for (const auto& e : entries) {
    transport += e.recourse;
    penalty += e.penalty;
    worst += e.value;
    out.certificate.push_back(expand_entry(e, active, spec.num_pairs(), spec.num_arcs()));
  }
  out.breakdown.transport = transport / n;
  out.breakdown.penalty = -out.beta * penalty / n;
  out.breakdown.theta_beta = config.theta * out.beta;
  out.psi = worst / n + out.breakdown.theta_beta + inv.total();
  out.feasible = true;
  out.lp_solves = eval.lp_solves();
  return out;
}

double saa_objective(const NetworkSpec& spec, const DemandModel& demand, const Design& design,
                     BatteryRhsMode mode) {
  check_design(spec, design);
  const ActiveInstance active = prune_inactive_pairs(spec, demand);
  RecourseEvaluator eval(active.spec, design, mode, effective_big_M(spec, demand));
  double total = 0.0;
  for (const auto& s : active.demand.samples) total += eval.value(s);
  return total / static_cast<double>(active.demand.samples.size()) + investment_cost(spec, design).total();
}

}  // namespace uamn
