#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "enumeration_detail.hpp"
#include "uamn/dro.hpp"

namespace uamn {

LatticeTooLarge::LatticeTooLarge(std::uint64_t count_, std::uint64_t cap_)
    : std::runtime_error([&] {
        std::ostringstream msg;
        msg << "design lattice has " << count_ << " designs, cap is " << cap_;
        return msg.str();
      }()),
      count(count_),
      cap(cap_) {}

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t mul_sat(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > kSaturated / b) return kSaturated;
  return a * b;
}

std::uint64_t add_sat(std::uint64_t a, std::uint64_t b) { return a > kSaturated - b ? kSaturated : a + b; }

}  // namespace

DesignLattice::DesignLattice(const NetworkSpec& spec, const DemandModel& demand, std::optional<int> y_max)
    : spec_(spec) {
  forced_.assign(spec.num_nodes(), 0);
  for (std::size_t k = 0; k < spec.num_pairs(); ++k) {
    if (demand.upper[k] > 0.0 || demand.lower[k] > 0.0) {
      forced_[spec.od_pairs[k].origin.value()] = 1;
      forced_[spec.od_pairs[k].destination.value()] = 1;
    }
  }
  for (std::size_t i = 0; i < spec.num_nodes(); ++i) {
    if (!forced_[i]) free_nodes_.push_back(i);
  }
  const std::size_t T = spec.num_channel_types();
  y_max_.resize(spec.num_arcs() * T);
  for (std::size_t a = 0; a < spec.num_arcs(); ++a) {
    for (std::size_t t = 0; t < T; ++t) {
      y_max_[a * T + t] = y_max ? *y_max : spec.arcs[a].channels[t].max_channels;
    }
  }
}

int DesignLattice::max_channels(std::size_t arc, std::size_t type) const {
  return y_max_[arc * spec_.num_channel_types() + type];
}

namespace detail {

std::vector<std::uint8_t> open_vector(const DesignLattice& lattice, std::uint64_t mask) {
  std::vector<std::uint8_t> z = lattice.forced_open();
  const auto& free_nodes = lattice.free_nodes();
  const std::size_t F = free_nodes.size();
  for (std::size_t f = 0; f < F; ++f) {
    // Free node f maps to bit F-1-f so that counting up is lexicographic.
    if ((mask >> (F - 1 - f)) & 1U) z[free_nodes[f]] = 1;
  }
  return z;
}

std::vector<std::size_t> open_slots(const NetworkSpec& spec, const std::vector<std::uint8_t>& z) {
  std::vector<std::size_t> slots;
  const std::size_t T = spec.num_channel_types();
  for (std::size_t a = 0; a < spec.num_arcs(); ++a) {
    if (!z[spec.arcs[a].tail.value()] || !z[spec.arcs[a].head.value()]) continue;
    for (std::size_t t = 0; t < T; ++t) slots.push_back(a * T + t);
  }
  return slots;
}

std::uint64_t slot_combinations(const DesignLattice& lattice, const std::vector<std::size_t>& slots,
                                std::size_t T) {
  std::uint64_t count = 1;
  for (std::size_t s : slots) {
    count = mul_sat(count, static_cast<std::uint64_t>(lattice.max_channels(s / T, s % T)) + 1);
  }
  return count;
}

Design decode(const NetworkSpec& spec, const DesignLattice& lattice, std::uint64_t mask, std::uint64_t index) {
  Design d = Design::closed(spec);
  d.open = open_vector(lattice, mask);
  const std::size_t T = spec.num_channel_types();
  const auto slots = open_slots(spec, d.open);
  // Slot 0 is the most significant digit.
  for (std::size_t s = slots.size(); s-- > 0;) {
    const std::uint64_t radix = static_cast<std::uint64_t>(lattice.max_channels(slots[s] / T, slots[s] % T)) + 1;
    d.channels[slots[s]] = static_cast<int>(index % radix);
    index /= radix;
  }
  return d;
}

bool pairs_connected(const NetworkSpec& spec, const Design& design) {
  const std::size_t V = spec.num_nodes();
  std::vector<std::vector<std::size_t>> out(V);
  for (std::size_t a = 0; a < spec.num_arcs(); ++a) {
    if (design.arc_capacity(spec, ArcId(a)) > 0.0) {
      out[spec.arcs[a].tail.value()].push_back(spec.arcs[a].head.value());
    }
  }
  for (const OdPair& p : spec.od_pairs) {
    std::vector<char> seen(V, 0);
    std::queue<std::size_t> q;
    q.push(p.origin.value());
    seen[p.origin.value()] = 1;
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t v : out[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          q.push(v);
        }
      }
    }
    if (!seen[p.destination.value()]) return false;
  }
  return true;
}

}  // namespace detail

std::uint64_t DesignLattice::size() const {
  const std::size_t F = free_nodes_.size();
  if (F >= 63) return kSaturated;
  std::uint64_t total = 0;
  const std::size_t T = spec_.num_channel_types();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << F); ++mask) {
    const auto z = detail::open_vector(*this, mask);
    total = add_sat(total, detail::slot_combinations(*this, detail::open_slots(spec_, z), T));
    if (total == kSaturated) break;
  }
  return total;
}

bool DesignLattice::admissible(const Design& design) const {
  if (design.open.size() != spec_.num_nodes()) return false;
  for (std::size_t i = 0; i < spec_.num_nodes(); ++i) {
    if (forced_[i] && !design.open[i]) return false;
  }
  const std::size_t T = spec_.num_channel_types();
  for (std::size_t a = 0; a < spec_.num_arcs(); ++a) {
    const bool ends_open = design.open[spec_.arcs[a].tail.value()] && design.open[spec_.arcs[a].head.value()];
    for (std::size_t t = 0; t < T; ++t) {
      const int y = design.channels[a * T + t];
      if (y < 0 || y > max_channels(a, t)) return false;
      if (y > 0 && !ends_open) return false;
    }
  }
  return true;
}

void DesignLattice::for_each(const std::function<bool(const Design&)>& visit) const {
  const std::size_t F = free_nodes_.size();
  if (F >= 63) throw LatticeTooLarge(kSaturated, kSaturated);
  const std::size_t T = spec_.num_channel_types();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << F); ++mask) {
    const auto z = detail::open_vector(*this, mask);
    const std::uint64_t combos = detail::slot_combinations(*this, detail::open_slots(spec_, z), T);
    for (std::uint64_t idx = 0; idx < combos; ++idx) {
      if (!visit(detail::decode(spec_, *this, mask, idx))) return;
    }
  }
}

std::vector<std::size_t> airport_post_check(const NetworkSpec& spec, const Design& design,
                                            const WorstCaseCertificate& certificate) {
  const std::size_t A = spec.num_arcs();
  std::vector<char> used(spec.num_nodes(), 0);
  for (const auto& e : certificate) {
    for (std::size_t c = 0; c < e.flows.size(); ++c) {
      if (e.flows[c] <= 1e-9) continue;
      const Arc& arc = spec.arcs[c % A];
      used[arc.tail.value()] = used[arc.head.value()] = 1;
    }
  }
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < spec.num_nodes(); ++i) {
    if (used[i] && !design.open[i]) bad.push_back(i);
  }
  return bad;
}

namespace detail {

double tie_tolerance(double value) {
  return std::isfinite(value) ? 1e-9 * std::max(1.0, std::abs(value)) : 0.0;
}

// Objective of one design, abandoning the evaluation as soon as a valid
// lower bound reaches the cutoff (returns +inf then).
double bounded_objective(RecourseEvaluator& eval, const DemandModel& demand, const DroConfig& config,
                         double investment, double cutoff, bool& screened) {
  screened = false;
  const auto& samples = demand.samples;
  const double n = static_cast<double>(samples.size());
  const bool saa = config.mode == SolverMode::kSaa || config.mode == SolverMode::kDeterministic;

  const VertexDomain domain = vertex_domain(config.theta);
  if (!saa && domain == VertexDomain::kBox && std::isinf(eval.value(demand.upper))) {
    screened = true;
    return lp::kInf;
  }
  std::vector<double> q(samples.size());
  double mean_q = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    q[j] = eval.value(samples[j]);
    if (std::isinf(q[j])) {
      screened = true;
      return lp::kInf;
    }
    mean_q += q[j] / n;
  }
  if (saa) return mean_q + investment;

  const double theta_beta = config.beta_mode == BetaMode::kFixed ? config.theta * config.beta : 0.0;
  if (investment + theta_beta + mean_q >= cutoff - tie_tolerance(cutoff)) {
    screened = true;
    return lp::kInf;
  }
  if (config.beta_mode == BetaMode::kSearch) {
    std::vector<VertexTable> tables;
    for (const auto& s : samples) {
      tables.push_back(build_vertex_table(eval, s, demand.lower, demand.upper, domain));
      if (tables.back().infeasible_pattern) return lp::kInf;
    }
    double value = 0.0;
    optimize_beta(tables, config.theta, &value);
    return value + investment;
  }
  double partial = 0.0;  // sum over finished samples of the worst case
  double rest = mean_q * n;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    VertexTable table = build_vertex_table(eval, samples[j], demand.lower, demand.upper, domain);
    if (table.infeasible_pattern) return lp::kInf;
    const auto& v = table.vertices[table.argmax(config.beta)];
    partial += v.recourse - config.beta * v.penalty;
    rest -= q[j];
    if (investment + theta_beta + (partial + rest) / n >= cutoff - tie_tolerance(cutoff)) {
      screened = true;
      return lp::kInf;
    }
  }
  return partial / n + theta_beta + investment;
}

}  // namespace detail

namespace {

struct Candidate {
  double investment;
  std::uint64_t order;
  std::uint64_t mask;
  std::uint64_t index;
};

}  // namespace

SolveReport evaluate_design(const NetworkSpec& spec, const DemandModel& demand, const Design& design,
                            const DroConfig& config) {
  SolveReport report;
  report.instance = spec.name;
  report.config = config;
  report.mode = config.mode;
  report.design = design;
  const bool saa = config.mode == SolverMode::kSaa || config.mode == SolverMode::kDeterministic;
  if (!saa) {
    DroEvaluation ev = dro_objective(spec, demand, design, config);
    report.feasible = ev.feasible;
    report.objective = ev.psi;
    report.beta = ev.beta;
    report.breakdown = ev.breakdown;
    report.certificate = std::move(ev.certificate);
    report.diagnostics.lp_solves = ev.lp_solves;
  } else {
    const ActiveInstance active = prune_inactive_pairs(spec, demand);
    RecourseEvaluator eval(active.spec, design, config.battery, effective_big_M(spec, demand), config.tol);
    const InvestmentCost inv = investment_cost(spec, design);
    report.breakdown.channel = inv.channel;
    report.breakdown.infrastructure = inv.infrastructure;
    report.breakdown.capacity = inv.capacity;
    report.feasible = true;
    double total = 0.0;
    for (std::size_t j = 0; j < demand.samples.size(); ++j) {
      SecondStageResult s = eval.solve(active.demand.samples[j]);
      WorstCaseEntry e;
      e.demand = demand.samples[j];
      e.pattern.assign(spec.num_pairs(), PatternState::kZero);
      e.penalty = 0.0;
      e.recourse = e.value = s.value;
      e.infeasible = !s.feasible();
      if (s.feasible()) {
        e.flows.assign(spec.num_pairs() * spec.num_arcs(), 0.0);
        for (std::size_t i = 0; i < active.pair_map.size(); ++i) {
          for (std::size_t a = 0; a < spec.num_arcs(); ++a) {
            e.flows[active.pair_map[i] * spec.num_arcs() + a] = s.flows[i * spec.num_arcs() + a];
          }
        }
      }
      report.feasible = report.feasible && s.feasible();
      total += s.value;
      report.certificate.push_back(std::move(e));
    }
    report.breakdown.transport = total / static_cast<double>(demand.samples.size());
    report.objective = report.feasible ? report.breakdown.transport + inv.total() : lp::kInf;
    report.diagnostics.lp_solves = eval.lp_solves();
  }
  report.diagnostics.post_check_passed = report.feasible && airport_post_check(spec, design, report.certificate).empty();
  return report;
}

SolveReport solve_enumeration(const NetworkSpec& spec, const DemandModel& demand, const DroConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  if (config.mode == SolverMode::kDeterministic && demand.num_samples() != 1) {
    throw std::invalid_argument("deterministic mode needs exactly one demand vector");
  }
  const ActiveInstance active = prune_inactive_pairs(spec, demand);
  const DesignLattice lattice(spec, demand, config.y_max);
  const std::uint64_t size = lattice.size();
  if (size > config.lattice_cap) throw LatticeTooLarge(size, config.lattice_cap);

  std::vector<Candidate> candidates;
  candidates.reserve(size);
  {
    const std::size_t F = lattice.free_nodes().size();
    const std::size_t T = spec.num_channel_types();
    std::uint64_t order = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << F); ++mask) {
      const auto z = detail::open_vector(lattice, mask);
      const auto slots = detail::open_slots(spec, z);
      const std::uint64_t combos = detail::slot_combinations(lattice, slots, T);
      Design base = Design::closed(spec);
      base.open = z;
      const double fixed = investment_cost(spec, base).total();
      std::vector<double> slot_cost(slots.size());
      std::vector<std::uint64_t> radix(slots.size());
      for (std::size_t s = 0; s < slots.size(); ++s) {
        slot_cost[s] = spec.arcs[slots[s] / T].channels[slots[s] % T].cost;
        radix[s] = static_cast<std::uint64_t>(lattice.max_channels(slots[s] / T, slots[s] % T)) + 1;
      }
      for (std::uint64_t idx = 0; idx < combos; ++idx) {
        // Accumulate in slot order, matching investment_cost's arc order.
        double channel = 0.0;
        std::uint64_t rem = idx;
        std::vector<int> digits(slots.size());
        for (std::size_t s = slots.size(); s-- > 0;) {
          digits[s] = static_cast<int>(rem % radix[s]);
          rem /= radix[s];
        }
        for (std::size_t s = 0; s < slots.size(); ++s) channel += slot_cost[s] * digits[s];
        candidates.push_back({fixed + channel, order++, mask, idx});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.investment != b.investment) return a.investment < b.investment;
    return a.order < b.order;
  });

  SolveReport best_report;
  double best = lp::kInf;
  std::optional<Design> best_design;
  SolverDiagnostics diag;
  diag.lattice_size = size;
  const bool saa = config.mode == SolverMode::kSaa || config.mode == SolverMode::kDeterministic;
  const double theta_beta = (!saa && config.beta_mode == BetaMode::kFixed) ? config.theta * config.beta : 0.0;
  const double big_m = effective_big_M(spec, demand);

  for (const Candidate& c : candidates) {
    if (c.investment + theta_beta >= best - detail::tie_tolerance(best)) break;
    const Design d = detail::decode(spec, lattice, c.mask, c.index);
    if (!detail::pairs_connected(active.spec, d)) {
      ++diag.designs_screened;
      continue;
    }
    RecourseEvaluator eval(active.spec, d, config.battery, big_m, config.tol);
    bool screened = false;
    const double value = detail::bounded_objective(eval, active.demand, config, c.investment, best, screened);
    diag.lp_solves += eval.lp_solves();
    if (screened) {
      ++diag.designs_screened;
      continue;
    }
    ++diag.designs_evaluated;
    if (value < best - detail::tie_tolerance(best)) {
      best = value;
      best_design = d;
    }
  }

  if (!best_design) {
    SolveReport report;
    report.instance = spec.name;
    report.config = config;
    report.mode = config.mode;
    report.feasible = false;
    report.diagnostics = diag;
    report.diagnostics.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
  }
  SolveReport report = evaluate_design(spec, demand, *best_design, config);
  const bool passed = report.diagnostics.post_check_passed;
  diag.lp_solves += report.diagnostics.lp_solves;
  report.diagnostics = diag;
  report.diagnostics.post_check_passed = passed;
  if (!passed) {
    // Channels only connect open nodes, so flows never touch a closed node.
    throw std::logic_error("airport post-check failed on an admissible design");
  }
  report.diagnostics.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

SolveReport solve(const NetworkSpec& spec, const DemandModel& demand, const DroConfig& config) {
  if (config.mode == SolverMode::kLagrangian) return solve_lagrangian(spec, demand, config);
  return solve_enumeration(spec, demand, config);
}

}  // namespace uamn
