#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "enumeration_detail.hpp"
#include "uamn/dro.hpp"

namespace uamn {

std::vector<int> channel_sign_rule(const Arc& arc, std::span<const int> y_max, double mean_multiplier) {
  std::vector<int> y(arc.channels.size(), 0);
  for (std::size_t t = 0; t < arc.channels.size(); ++t) {
    if (arc.channels[t].cost - mean_multiplier * arc.channels[t].capacity < 0.0) y[t] = y_max[t];
  }
  return y;
}

ArcBlockResult solve_arc_block(const Arc& arc, std::span<const int> y_max, std::span<const double> loads,
                               double multiplier_cap) {
  const std::size_t N = loads.size();
  const std::size_t T = arc.channels.size();
  // max sum_t s_t + sum_h load_h lambda_h
  // s.t. s_t + y_max_t u_t mean(lambda) <= y_max_t Cd_t,  s_t <= 0,  0 <= lambda <= cap.
  lp::LpProblem block;
  for (std::size_t h = 0; h < N; ++h) block.add_var(-loads[h], 0.0, multiplier_cap);
  for (std::size_t t = 0; t < T; ++t) block.add_var(-1.0, -lp::kInf, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const double ym = static_cast<double>(y_max[t]);
    std::vector<lp::Term> row{{N + t, 1.0}};
    for (std::size_t h = 0; h < N; ++h) {
      row.push_back({h, ym * arc.channels[t].capacity / static_cast<double>(N)});
    }
    block.add_inequality(std::move(row), ym * arc.channels[t].cost);
  }
  const lp::LpSolution sol = lp::solve_lp(block);
  if (!sol.optimal()) throw std::runtime_error("arc block LP not optimal");
  ArcBlockResult out;
  out.multipliers.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(N));
  for (double l : out.multipliers) out.mean_multiplier += l / static_cast<double>(N);
  out.value = -sol.objective;
  out.channels = channel_sign_rule(arc, y_max, out.mean_multiplier);
  return out;
}

namespace {

struct Structure {
  const NetworkSpec& spec;
  const DemandModel& demand;
  const DesignLattice& lattice;
  const DroConfig& config;
  ExtensiveForm form;  // A and the structural parts of D
  double big_m;
  double cap;          // multiplier box
  std::size_t N, K, A, V, T, n;
  std::vector<std::vector<std::uint8_t>> admissible_z;  // lex order
  // Distinct demand vectors per sample, in pattern order.
  struct Vertex {
    std::vector<double> b;
    double rho;
  };
  std::vector<std::vector<Vertex>> vertices;
};

double battery_coef(const Structure& s, std::size_t a, const std::vector<std::uint8_t>& z) {
  double coef = s.spec.arcs[a].energy;
  if (s.config.battery == BatteryRhsMode::kFlowWeighted && z[s.spec.arcs[a].tail.value()]) {
    coef -= s.spec.battery_boost;
  }
  return coef;
}

double battery_multiplier(const Structure& s, const std::vector<std::uint8_t>& z) {
  double m = 0.0;
  switch (s.config.battery) {
    case BatteryRhsMode::kLiteral:
      for (const Arc& arc : s.spec.arcs) m += z[arc.tail.value()] ? 1.0 : 0.0;
      break;
    case BatteryRhsMode::kNodeSum:
      for (auto v : z) m += v ? 1.0 : 0.0;
      break;
    case BatteryRhsMode::kFlowWeighted: break;
  }
  return m * s.spec.battery_boost;
}

struct PhaseResult {
  double lagrangian_value = lp::kInf;
  double violation = lp::kInf;
  int iterations = 0;
  std::vector<Design> candidates;  // recovered designs, in discovery order
};

// One subgradient run. With fixed_z set, z is pinned and flow multipliers on
// arcs touching a closed node stay at zero.
PhaseResult run_phase(const Structure& s, const std::optional<std::vector<std::uint8_t>>& fixed_z) {
  const std::size_t N = s.N, K = s.K, A = s.A, V = s.V, T = s.T, n = s.n;
  const double dN = static_cast<double>(N);
  const double beta = s.config.beta;
  const double cap = s.cap;
  const auto& opts = s.config.lagrangian;

  std::vector<char> allowed(A, 1);
  if (fixed_z) {
    for (std::size_t a = 0; a < A; ++a) {
      allowed[a] = (*fixed_z)[s.spec.arcs[a].tail.value()] && (*fixed_z)[s.spec.arcs[a].head.value()];
    }
  }
  double gamma_scale = 0.0;
  for (double w : s.demand.upper) gamma_scale = std::max(gamma_scale, w / dN);
  gamma_scale = std::max(gamma_scale, 1e-9);

  // Start from the sample flows of the most generous admissible design.
  std::vector<std::vector<double>> gamma(N, std::vector<double>(n, 0.0));
  {
    Design full = Design::closed(s.spec);
    full.open = fixed_z ? *fixed_z : s.admissible_z.back();
    for (std::size_t a = 0; a < A; ++a) {
      const bool ends = full.open[s.spec.arcs[a].tail.value()] && full.open[s.spec.arcs[a].head.value()];
      for (std::size_t t = 0; t < T; ++t) full.channels[a * T + t] = ends ? s.lattice.max_channels(a, t) : 0;
    }
    RecourseEvaluator eval(s.spec, full, s.config.battery, s.big_m, s.config.tol);
    for (std::size_t j = 0; j < N; ++j) {
      SecondStageResult r = eval.solve(s.demand.samples[j]);
      if (r.feasible()) {
        for (std::size_t c = 0; c < n; ++c) gamma[j][c] = r.flows[c] / dN;
      }
    }
  }

  std::vector<std::vector<double>> mu_sum(N, std::vector<double>(K * V, 0.0));
  std::vector<std::vector<double>> lambda_sum(N, std::vector<double>(A + V + K, 0.0));
  std::vector<std::vector<double>> mu(N), lambda(N);
  std::vector<std::size_t> pattern_choice(N, 0);
  std::set<Design> seen;
  PhaseResult out;

  const std::vector<std::vector<std::uint8_t>> z_options =
      fixed_z ? std::vector<std::vector<std::uint8_t>>{*fixed_z} : s.admissible_z;

  for (int it = 1; it <= opts.max_iterations; ++it) {
    out.iterations = it;
    double value = s.config.theta * beta;

    // Block (a): demand vertex and flow-conservation multipliers per sample.
    for (std::size_t j = 0; j < N; ++j) {
      const std::vector<double> r = s.form.eq.multiply(gamma[j]);
      double transfer = 0.0;
      for (std::size_t row = 2 * K; row < r.size(); ++row) transfer += std::abs(r[row]);
      double best = -lp::kInf;
      std::size_t best_v = 0;
      for (std::size_t v = 0; v < s.vertices[j].size(); ++v) {
        const auto& vx = s.vertices[j][v];
        double l1 = transfer;
        for (std::size_t k = 0; k < K; ++k) {
          l1 += std::abs(r[k] - vx.b[k] / dN) + std::abs(r[K + k] + vx.b[k] / dN);
        }
        const double val = cap * l1 - beta * vx.rho / dN;
        if (std::isinf(best) || val > best + 1e-12 * std::max(1.0, std::abs(best))) {
          best = val;
          best_v = v;
        }
      }
      pattern_choice[j] = best_v;
      const auto& b = s.vertices[j][best_v].b;
      mu[j].assign(K * V, 0.0);
      for (std::size_t row = 0; row < r.size(); ++row) {
        double res = r[row];
        if (row < K) res -= b[row] / dN;
        else if (row < 2 * K) res += b[row - K] / dN;
        if (std::abs(res) > 1e-12) mu[j][row] = res > 0.0 ? cap : -cap;
      }
      value += best;
    }

    // Block (b): airports with the airport and battery multipliers.
    double best_b = lp::kInf;
    std::size_t best_z = 0;
    std::vector<std::vector<double>> best_l1(N), best_l3(N);
    for (std::size_t zi = 0; zi < z_options.size(); ++zi) {
      const auto& z = z_options[zi];
      double val = 0.0;
      for (std::size_t i = 0; i < V; ++i) {
        if (z[i]) val += s.spec.nodes[i].infrastructure_cost + s.spec.nodes[i].capacity_unit_cost * s.spec.nodes[i].airport_capacity;
      }
      const double bat_mult = battery_multiplier(s, z);
      std::vector<std::vector<double>> l1(N), l3(N);
      for (std::size_t j = 0; j < N; ++j) {
        // Objective coefficients of lambda1 (per node) and lambda3 (per pair).
        std::vector<double> through(V, 0.0);
        std::vector<double> energy(K, 0.0);
        for (std::size_t k = 0; k < K; ++k) {
          for (std::size_t a = 0; a < A; ++a) {
            const double g = gamma[j][k * A + a];
            if (g == 0.0) continue;
            through[s.spec.arcs[a].tail.value()] += g;
            through[s.spec.arcs[a].head.value()] += g;
            energy[k] += battery_coef(s, a, z) * g;
          }
        }
        const auto& b = s.vertices[j][pattern_choice[j]].b;
        lp::LpProblem inner;
        for (std::size_t i = 0; i < V; ++i) {
          const double e1 = z[i] ? s.spec.nodes[i].airport_capacity : s.big_m;
          inner.add_var(-(through[i] - e1 / dN), 0.0, cap);
        }
        for (std::size_t k = 0; k < K; ++k) inner.add_var(-(energy[k] - b[k] * bat_mult / dN), 0.0, cap);
        const lp::LpSolution sol = lp::solve_lp(inner);
        if (!sol.optimal()) throw std::runtime_error("airport block LP not optimal");
        val += -sol.objective;
        l1[j].assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(V));
        l3[j].assign(sol.x.begin() + static_cast<std::ptrdiff_t>(V), sol.x.end());
      }
      if (std::isinf(best_b) || val < best_b - 1e-12 * std::max(1.0, std::abs(best_b))) {
        best_b = val;
        best_z = zi;
        best_l1 = std::move(l1);
        best_l3 = std::move(l3);
      }
    }
    value += best_b;
    const auto& z = z_options[best_z];

    // Block (c): channels per arc.
    std::vector<std::vector<double>> l2(N, std::vector<double>(A, 0.0));
    std::vector<int> y(A * T, 0);
    std::vector<double> mean_l2(A, 0.0);
    std::vector<double> max_load(A, 0.0);
    for (std::size_t a = 0; a < A; ++a) {
      if (!allowed[a]) continue;
      std::vector<double> loads(N, 0.0);
      for (std::size_t h = 0; h < N; ++h) {
        for (std::size_t k = 0; k < K; ++k) loads[h] += gamma[h][k * A + a];
        max_load[a] = std::max(max_load[a], loads[h]);
      }
      std::vector<int> ym(T);
      for (std::size_t t = 0; t < T; ++t) ym[t] = s.lattice.max_channels(a, t);
      ArcBlockResult blk = solve_arc_block(s.spec.arcs[a], ym, loads, cap);
      value += blk.value;
      mean_l2[a] = blk.mean_multiplier;
      for (std::size_t h = 0; h < N; ++h) l2[h][a] = blk.multipliers[h];
      for (std::size_t t = 0; t < T; ++t) y[a * T + t] = blk.channels[t];
    }

    for (std::size_t j = 0; j < N; ++j) {
      for (std::size_t c = 0; c < n; ++c) value += s.form.cost[c] * gamma[j][c];
      lambda[j].assign(A + V + K, 0.0);
      for (std::size_t a = 0; a < A; ++a) lambda[j][a] = l2[j][a];
      for (std::size_t i = 0; i < V; ++i) lambda[j][A + i] = best_l1[j][i];
      for (std::size_t k = 0; k < K; ++k) lambda[j][A + V + k] = best_l3[j][k];
      for (std::size_t r = 0; r < K * V; ++r) mu_sum[j][r] += mu[j][r];
      for (std::size_t r = 0; r < A + V + K; ++r) lambda_sum[j][r] += lambda[j][r];
    }
    out.lagrangian_value = std::min(out.lagrangian_value, value);

    // Dual feasibility of the averaged multipliers, and the subgradient.
    double violation = 0.0;
    std::vector<std::vector<double>> grad(N);
    for (std::size_t j = 0; j < N; ++j) {
      auto reduced = [&](const std::vector<double>& m, const std::vector<double>& l, double scale) {
        std::vector<double> g = s.form.cost;
        const auto am = s.form.eq.transpose_multiply(m);
        for (std::size_t c = 0; c < n; ++c) {
          const std::size_t a = c % A;
          const std::size_t k = c / A;
          (void)k;
          const Arc& arc = s.spec.arcs[a];
          g[c] += scale * (am[c] + l[a] + l[A + arc.tail.value()] + l[A + arc.head.value()] +
                           battery_coef(s, a, z) * l[A + V + c / A]);
        }
        return g;
      };
      const auto avg = reduced(mu_sum[j], lambda_sum[j], 1.0 / it);
      for (std::size_t c = 0; c < n; ++c) {
        if (allowed[c % A]) violation = std::max(violation, -avg[c]);
      }
      grad[j] = reduced(mu[j], lambda[j], 1.0);
    }
    out.violation = violation;

    // Recover a design: block choices, plus channels priced exactly at the
    // kink that carry flow, plus every node that carries flow.
    Design d = Design::closed(s.spec);
    d.open = z;
    for (std::size_t a = 0; a < A; ++a) {
      if (!allowed[a]) continue;
      for (std::size_t t = 0; t < T; ++t) {
        const Channel& ch = s.spec.arcs[a].channels[t];
        const double coef = ch.cost - mean_l2[a] * ch.capacity;
        int count = y[a * T + t];
        if (count == 0 && std::abs(coef) <= 1e-9 * std::max(1.0, ch.cost) && max_load[a] > 1e-6 * gamma_scale) {
          const double need = std::ceil(max_load[a] * dN / ch.capacity - 1e-9);
          count = std::clamp(static_cast<int>(need), 1, s.lattice.max_channels(a, t));
        }
        d.channels[a * T + t] = count;
      }
    }
    for (std::size_t a = 0; a < A; ++a) {
      bool built = false;
      for (std::size_t t = 0; t < T; ++t) built = built || d.channels[a * T + t] > 0;
      if (built || max_load[a] > 1e-6 * gamma_scale) {
        if (!fixed_z) {
          d.open[s.spec.arcs[a].tail.value()] = 1;
          d.open[s.spec.arcs[a].head.value()] = 1;
        }
      }
    }
    if (s.lattice.admissible(d) && seen.insert(d).second) out.candidates.push_back(d);

    if (violation <= opts.violation_tolerance) break;

    // Projected, normalised subgradient step on gamma.
    double gnorm = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      for (std::size_t c = 0; c < n; ++c) {
        if (allowed[c % A]) gnorm = std::max(gnorm, std::abs(grad[j][c]));
      }
    }
    if (gnorm <= 0.0) break;
    const double step = opts.initial_step / std::sqrt(static_cast<double>(it)) * gamma_scale / gnorm;
    for (std::size_t j = 0; j < N; ++j) {
      for (std::size_t c = 0; c < n; ++c) {
        gamma[j][c] = allowed[c % A] ? std::max(0.0, gamma[j][c] - step * grad[j][c]) : 0.0;
      }
    }
  }
  return out;
}

}  // namespace

SolveReport solve_lagrangian(const NetworkSpec& spec, const DemandModel& demand, const DroConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  if (config.beta_mode != BetaMode::kFixed) {
    throw std::invalid_argument("the Lagrangian solver needs a fixed beta");
  }
  const ActiveInstance active = prune_inactive_pairs(spec, demand);
  const DesignLattice lattice(spec, demand, config.y_max);
  const double big_m = effective_big_M(spec, demand);

  Structure s{active.spec, active.demand, lattice, config, {}, big_m, 0.0, 0, 0, 0, 0, 0, 0, {}, {}};
  s.N = active.demand.num_samples();
  s.K = active.spec.num_pairs();
  s.A = spec.num_arcs();
  s.V = spec.num_nodes();
  s.T = spec.num_channel_types();
  s.n = s.K * s.A;
  {
    Design all_open = Design::closed(active.spec);
    std::fill(all_open.open.begin(), all_open.open.end(), 1);
    s.form = build_extensive_form(active.spec, all_open, std::vector<double>(s.K, 0.0), config.battery, big_m);
  }
  s.cap = beta_saturation(active.spec);
  const std::size_t F = lattice.free_nodes().size();
  if (F >= 31) throw LatticeTooLarge(std::uint64_t{1} << 31, config.lattice_cap);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << F); ++mask) {
    s.admissible_z.push_back(detail::open_vector(lattice, mask));
  }
  for (const auto& sample : active.demand.samples) {
    std::vector<Structure::Vertex> vs;
    std::set<std::vector<double>> seen;
    const std::uint64_t count = pattern_count(s.K);
    for (std::uint64_t p = 0; p < count; ++p) {
      auto pat = decode_pattern(p, s.K);
      auto b = pattern_demand(pat, sample, active.demand.lower, active.demand.upper);
      if (!seen.insert(b).second) continue;
      const double rho = wasserstein_penalty(b, sample);
      vs.push_back({std::move(b), rho});
    }
    s.vertices.push_back(std::move(vs));
  }

  // Main run with free airports, then one pinned run per airport vector to
  // diversify the recovered designs.
  PhaseResult main = run_phase(s, std::nullopt);
  std::vector<Design> candidates = main.candidates;
  int iterations = main.iterations;
  for (const auto& z : s.admissible_z) {
    PhaseResult pinned = run_phase(s, z);
    iterations += pinned.iterations;
    candidates.insert(candidates.end(), pinned.candidates.begin(), pinned.candidates.end());
  }

  // Exact evaluation of the recovered designs (memoised), then a 1-flip
  // local search around the incumbent.
  std::map<Design, double> exact;
  double best = lp::kInf;
  std::optional<Design> incumbent;
  SolverDiagnostics diag;
  auto consider = [&](const Design& d) {
    if (exact.count(d) || !lattice.admissible(d)) return false;
    const double inv = investment_cost(spec, d).total();
    double value = lp::kInf;
    bool screened = false;
    if (detail::pairs_connected(active.spec, d)) {
      RecourseEvaluator eval(active.spec, d, config.battery, big_m, config.tol);
      value = detail::bounded_objective(eval, active.demand, config, inv, best, screened);
      diag.lp_solves += eval.lp_solves();
    }
    exact.emplace(d, value);
    if (screened || std::isinf(value)) {
      ++diag.designs_screened;
      return false;
    }
    ++diag.designs_evaluated;
    const double tol = detail::tie_tolerance(best);
    const bool better = value < best - tol ||
                        (std::abs(value - best) <= tol && incumbent &&
                         (inv < investment_cost(spec, *incumbent).total() ||
                          (inv == investment_cost(spec, *incumbent).total() && d < *incumbent)));
    if (better) {
      best = value;
      incumbent = d;
      return true;
    }
    return false;
  };
  std::set<Design> unique(candidates.begin(), candidates.end());
  std::vector<Design> ordered(unique.begin(), unique.end());
  std::stable_sort(ordered.begin(), ordered.end(), [&](const Design& a, const Design& b) {
    return investment_cost(spec, a).total() < investment_cost(spec, b).total();
  });
  for (const Design& d : ordered) consider(d);

  // Drop descent per airport vector: start from every allowed channel and
  // remove one channel at a time while the objective improves.
  auto objective_below = [&](const Design& d, double cutoff) {
    if (!detail::pairs_connected(active.spec, d)) return lp::kInf;
    RecourseEvaluator eval(active.spec, d, config.battery, big_m, config.tol);
    bool screened = false;
    const double v =
        detail::bounded_objective(eval, active.demand, config, investment_cost(spec, d).total(), cutoff, screened);
    diag.lp_solves += eval.lp_solves();
    return v;
  };
  if (config.lagrangian.polish) {
    for (const auto& z : s.admissible_z) {
      Design d = Design::closed(spec);
      d.open = z;
      for (std::size_t a = 0; a < s.A; ++a) {
        const bool ends = z[spec.arcs[a].tail.value()] && z[spec.arcs[a].head.value()];
        for (std::size_t t = 0; t < s.T; ++t) d.channels[a * s.T + t] = ends ? lattice.max_channels(a, t) : 0;
      }
      double current = objective_below(d, lp::kInf);
      if (std::isinf(current)) continue;
      bool improved = true;
      while (improved) {
        improved = false;
        for (std::size_t c = 0; c < d.channels.size() && !improved; ++c) {
          if (d.channels[c] == 0) continue;
          Design e = d;
          --e.channels[c];
          const double v = objective_below(e, current);
          if (v < current - detail::tie_tolerance(current)) {
            d = std::move(e);
            current = v;
            improved = true;
          }
        }
      }
      consider(d);
    }
  }

  if (config.lagrangian.polish && incumbent) {
    bool improved = true;
    while (improved) {
      improved = false;
      const Design base = *incumbent;
      for (std::size_t i : lattice.free_nodes()) {
        Design d = base;
        d.open[i] = d.open[i] ? 0 : 1;
        if (!d.open[i]) {
          for (std::size_t a = 0; a < s.A; ++a) {
            if (spec.arcs[a].tail.value() == i || spec.arcs[a].head.value() == i) {
              for (std::size_t t = 0; t < s.T; ++t) d.channels[a * s.T + t] = 0;
            }
          }
        }
        improved = consider(d) || improved;
      }
      for (std::size_t a = 0; a < s.A; ++a) {
        for (std::size_t t = 0; t < s.T; ++t) {
          for (int delta : {-1, 1}) {
            Design d = base;
            d.channels[a * s.T + t] += delta;
            if (d.channels[a * s.T + t] < 0 || d.channels[a * s.T + t] > lattice.max_channels(a, t)) continue;
            if (d.channels[a * s.T + t] > 0) {
              d.open[spec.arcs[a].tail.value()] = 1;
              d.open[spec.arcs[a].head.value()] = 1;
            }
            improved = consider(d) || improved;
          }
        }
      }
    }
  }

  SolveReport report;
  if (incumbent) {
    report = evaluate_design(spec, demand, *incumbent, config);
  } else {
    report.instance = spec.name;
    report.config = config;
    report.feasible = false;
  }
  report.mode = SolverMode::kLagrangian;
  const bool passed = report.diagnostics.post_check_passed;
  diag.lp_solves += report.diagnostics.lp_solves;
  diag.lattice_size = lattice.size();
  diag.post_check_passed = passed;
  diag.iterations = iterations;
  diag.lagrangian_value = main.lagrangian_value;
  diag.violation = main.violation;
  diag.converged = main.violation <= config.lagrangian.violation_tolerance;
  diag.gap = report.feasible ? (report.objective - main.lagrangian_value) / std::max(1.0, std::abs(report.objective))
                             : lp::kInf;
  report.diagnostics = diag;
  report.diagnostics.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace uamn
