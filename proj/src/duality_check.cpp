#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "uamn/dro.hpp"

namespace uamn {

DualityCheckResult duality_gap_check(std::span<const double> grid, std::span<const double> recourse,
                                     std::span<const std::size_t> samples, double theta) {
  const std::size_t S = grid.size();
  const std::size_t N = samples.size();
  if (recourse.size() != S) throw DimensionError("duality_gap_check: one recourse value per grid point");
  if (S == 0 || N == 0) throw std::invalid_argument("duality_gap_check: empty grid or sample set");
  for (std::size_t j : samples) {
    if (j >= S) throw std::invalid_argument("duality_gap_check: sample index outside the grid");
  }
  if (theta < 0.0) throw std::invalid_argument("duality_gap_check: theta must be >= 0");

  DualityCheckResult out;
  // Left side: transport plan pi(j, s) >= 0 moving each sample's mass 1/N
  // to grid points, cost |grid_s - xi_j| within theta; maximise expected Q.
  lp::LpProblem transport;
  for (std::size_t j = 0; j < N; ++j) {
    for (std::size_t s = 0; s < S; ++s) transport.add_var(-recourse[s]);
  }
  for (std::size_t j = 0; j < N; ++j) {
    std::vector<lp::Term> row;
    for (std::size_t s = 0; s < S; ++s) row.push_back({j * S + s, 1.0});
    transport.add_equality(std::move(row), 1.0 / static_cast<double>(N));
  }
  std::vector<lp::Term> budget;
  for (std::size_t j = 0; j < N; ++j) {
    for (std::size_t s = 0; s < S; ++s) {
      const double d = std::abs(grid[s] - grid[samples[j]]);
      if (d > 0.0) budget.push_back({j * S + s, d});
    }
  }
  transport.add_inequality(std::move(budget), theta);
  const lp::LpSolution sol = lp::solve_lp(transport);
  if (!sol.optimal()) throw std::runtime_error("duality_gap_check: transport LP not optimal");
  out.lhs = -sol.objective;

  // Right side: convex piecewise-linear in beta; minimise over a log grid
  // refined by golden-section search.
  auto penalty_form = [&](double beta) {
    double total = 0.0;
    for (std::size_t j : samples) {
      double m = -lp::kInf;
      for (std::size_t s = 0; s < S; ++s) m = std::max(m, recourse[s] - beta * std::abs(grid[s] - grid[j]));
      total += m;
    }
    return total / static_cast<double>(N) + theta * beta;
  };
  double beta_hi = 0.0;
  for (std::size_t j : samples) {
    for (std::size_t s = 0; s < S; ++s) {
      const double d = std::abs(grid[s] - grid[j]);
      if (d > 0.0) beta_hi = std::max(beta_hi, (recourse[s] - recourse[j]) / d);
    }
  }
  std::vector<double> candidates{0.0};
  if (beta_hi > 0.0) {
    for (int e = -12; e <= 0; ++e) candidates.push_back(beta_hi * std::pow(10.0, e));
    candidates.push_back(2.0 * beta_hi);
  }
  std::size_t arg = 0;
  double best = penalty_form(0.0);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double v = penalty_form(candidates[i]);
    if (v < best) {
      best = v;
      arg = i;
    }
  }
  double beta = candidates[arg];
  if (candidates.size() > 1) {
    double lo = candidates[arg == 0 ? 0 : arg - 1];
    double hi = candidates[std::min(arg + 1, candidates.size() - 1)];
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = penalty_form(x1), f2 = penalty_form(x2);
    for (int it = 0; it < 300 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = penalty_form(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = penalty_form(x2);
      }
    }
    const double x = f1 <= f2 ? x1 : x2;
    const double fx = std::min(f1, f2);
    if (fx < best) {
      best = fx;
      beta = x;
    }
  }
  out.rhs = best;
  out.beta = beta;
  return out;
}

}  // namespace uamn
