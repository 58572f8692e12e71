#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "uamn/linprog.hpp"

namespace uamn::lp {

namespace {

struct Search {
  const LpProblem& base;
  std::span<const std::size_t> integer_vars;
  const BranchAndBoundOptions& options;
  LpSolution incumbent;
  long nodes = 0;
  bool unbounded = false;

  double cutoff() const {
    if (!incumbent.optimal()) return kInf;
    return incumbent.objective - options.lp.gap_tol * std::max(1.0, std::abs(incumbent.objective));
  }

  void explore(std::vector<double>& lower, std::vector<double>& upper) {
    if (++nodes > options.max_nodes || unbounded) return;
    LpProblem node = base;
    node.lower = lower;
    node.upper = upper;
    LpSolution relax = solve_lp(node, options.lp);
    if (relax.status == LpStatus::kUnbounded) {
      unbounded = true;
      return;
    }
    if (!relax.optimal() || relax.objective >= cutoff()) return;

    std::size_t branch = integer_vars.size();
    double best_frac = options.integrality_tol;
    for (std::size_t i = 0; i < integer_vars.size(); ++i) {
      const double v = relax.x[integer_vars[i]];
      const double frac = std::abs(v - std::round(v));
      // Most fractional; scanning in index order keeps the lowest index on ties.
      if (frac > best_frac + 1e-12) {
        best_frac = frac;
        branch = i;
      }
    }
    if (branch == integer_vars.size()) {
      for (std::size_t var : integer_vars) relax.x[var] = std::round(relax.x[var]);
      relax.objective = 0.0;
      for (std::size_t j = 0; j < relax.x.size(); ++j) relax.objective += base.objective[j] * relax.x[j];
      incumbent = std::move(relax);
      return;
    }
    const std::size_t var = integer_vars[branch];
    const double v = relax.x[var];
    const double saved_lo = lower[var];
    const double saved_hi = upper[var];
    // Down branch first.
    upper[var] = std::floor(v);
    explore(lower, upper);
    upper[var] = saved_hi;
    lower[var] = std::ceil(v);
    explore(lower, upper);
    lower[var] = saved_lo;
  }
};

}  // namespace

LpSolution solve_bb(const LpProblem& problem, std::span<const std::size_t> integer_vars,
                    const BranchAndBoundOptions& options) {
  if (integer_vars.empty()) return solve_lp(problem, options.lp);
  std::vector<double> lower = problem.lower;
  std::vector<double> upper = problem.upper;
  for (std::size_t var : integer_vars) {
    if (var >= problem.num_vars()) throw std::invalid_argument("solve_bb: integer variable out of range");
    if (!std::isfinite(lower[var]) || !std::isfinite(upper[var])) {
      throw std::invalid_argument("solve_bb: integer variables must be bounded");
    }
    lower[var] = std::ceil(lower[var] - options.integrality_tol);
    upper[var] = std::floor(upper[var] + options.integrality_tol);
    if (lower[var] > upper[var]) {
      LpSolution sol;
      sol.status = LpStatus::kInfeasible;
      return sol;
    }
  }
  Search search{problem, integer_vars, options, {}, 0, false};
  search.incumbent.status = LpStatus::kInfeasible;
  search.explore(lower, upper);
  if (search.unbounded) {
    LpSolution sol;
    sol.status = LpStatus::kUnbounded;
    return sol;
  }
  if (search.nodes > options.max_nodes && !search.incumbent.optimal()) {
    search.incumbent.status = LpStatus::kNumericalFailure;
  }
  return search.incumbent;
}

}  // namespace uamn::lp
