#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "uamn/dro.hpp"

namespace uamn {

double wasserstein_penalty(std::span<const double> b, std::span<const double> reference) {
  if (b.size() != reference.size()) throw DimensionError("wasserstein_penalty: dimension mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) total += std::abs(b[k] - reference[k]);
  return total;
}

std::vector<double> pattern_demand(const VertexPattern& pattern, std::span<const double> reference,
                                   std::span<const double> lower, std::span<const double> upper) {
  const std::size_t K = pattern.size();
  if (reference.size() != K || lower.size() != K || upper.size() != K) {
    throw DimensionError("pattern_demand: dimension mismatch");
  }
  std::vector<double> b(K);
  for (std::size_t k = 0; k < K; ++k) {
    switch (pattern[k]) {
      case PatternState::kZero: b[k] = reference[k]; break;
      case PatternState::kPlus: b[k] = upper[k]; break;
      case PatternState::kMinus: b[k] = lower[k]; break;
    }
  }
  return b;
}

double linearized_penalty(const VertexPattern& pattern, std::span<const double> reference,
                          std::span<const double> lower, std::span<const double> upper) {
  double total = 0.0;
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    const double plus = pattern[k] == PatternState::kPlus ? 1.0 : 0.0;
    const double minus = pattern[k] == PatternState::kMinus ? 1.0 : 0.0;
    total += (upper[k] - reference[k]) * plus - (lower[k] - reference[k]) * minus;
  }
  return total;
}

std::uint64_t pattern_count(std::size_t num_pairs) {
  if (num_pairs > 40) throw std::length_error("pattern_count: too many O-D pairs to enumerate");
  std::uint64_t count = 1;
  for (std::size_t k = 0; k < num_pairs; ++k) count *= 3;
  return count;
}

VertexPattern decode_pattern(std::uint64_t index, std::size_t num_pairs) {
  VertexPattern pattern(num_pairs);
  for (std::size_t k = 0; k < num_pairs; ++k) {
    pattern[k] = static_cast<PatternState>(index % 3);
    index /= 3;
  }
  return pattern;
}

std::string pattern_string(const VertexPattern& pattern) {
  std::string s;
  for (PatternState st : pattern) {
    s += st == PatternState::kZero ? '0' : (st == PatternState::kPlus ? '+' : '-');
  }
  return s;
}

// ---------------------------------------------------------------------------

struct RecourseEvaluator::Reduced {
  std::vector<std::size_t> cols;        // full column of each LP variable
  std::vector<std::size_t> eq_rows;     // full equality row of each LP row
  std::vector<std::size_t> empty_eq;    // equality rows with no remaining column
  std::vector<std::size_t> ineq_rows;
  std::vector<std::size_t> empty_ineq;
  std::unique_ptr<lp::RhsSequenceSolver> solver;
  std::vector<double> eq_full, ineq_full, eq_lp, ineq_lp;
};

RecourseEvaluator::RecourseEvaluator(const NetworkSpec& spec, const Design& design, BatteryRhsMode mode,
                                     double big_m, Tolerances tol)
    : spec_(spec), design_(design), mode_(mode), big_m_(big_m), tol_(tol) {
  std::vector<double> zero(spec.num_pairs(), 0.0);
  form_ = build_extensive_form(spec, design, zero, mode, big_m);

  reduced_ = std::make_unique<Reduced>();
  Reduced& red = *reduced_;
  const std::size_t n = form_.cost.size();
  std::vector<std::size_t> new_index(n, SIZE_MAX);
  for (std::size_t c = 0; c < n; ++c) {
    if (design.arc_capacity(spec, form_.columns[c].arc) > 0.0) {
      new_index[c] = red.cols.size();
      red.cols.push_back(c);
    }
  }
  lp::LpProblem problem;
  for (std::size_t c : red.cols) problem.add_var(form_.cost[c]);
  auto reduce_row = [&](const std::vector<SparseMatrix::Entry>& row) {
    std::vector<lp::Term> terms;
    for (const auto& e : row) {
      if (new_index[e.col] != SIZE_MAX) terms.push_back({new_index[e.col], e.value});
    }
    return terms;
  };
  for (std::size_t r = 0; r < form_.eq.num_rows(); ++r) {
    auto terms = reduce_row(form_.eq.rows[r]);
    if (terms.empty()) {
      red.empty_eq.push_back(r);
    } else {
      red.eq_rows.push_back(r);
      problem.add_equality(std::move(terms), 0.0);
    }
  }
  for (std::size_t r = 0; r < form_.ineq.num_rows(); ++r) {
    auto terms = reduce_row(form_.ineq.rows[r]);
    if (terms.empty()) {
      red.empty_ineq.push_back(r);
    } else {
      red.ineq_rows.push_back(r);
      problem.add_inequality(std::move(terms), 0.0);
    }
  }
  lp::SimplexOptions options;
  options.feas_tol = tol.feasibility;
  options.gap_tol = tol.gap;
  red.solver = std::make_unique<lp::RhsSequenceSolver>(std::move(problem), options);
}

RecourseEvaluator::~RecourseEvaluator() = default;

lp::LpSolution RecourseEvaluator::solve_reduced(std::span<const double> demand, bool& trivially_infeasible) {
  Reduced& red = *reduced_;
  fill_rhs(spec_, design_, demand, mode_, big_m_, red.eq_full, red.ineq_full);
  trivially_infeasible = false;
  double scale = 1.0;
  for (double v : demand) scale = std::max(scale, std::abs(v));
  for (std::size_t r : red.empty_eq) {
    if (std::abs(red.eq_full[r]) > tol_.feasibility * scale) trivially_infeasible = true;
  }
  for (std::size_t r : red.empty_ineq) {
    if (red.ineq_full[r] < -tol_.feasibility * scale) trivially_infeasible = true;
  }
  if (trivially_infeasible) return {};
  red.eq_lp.resize(red.eq_rows.size());
  red.ineq_lp.resize(red.ineq_rows.size());
  for (std::size_t i = 0; i < red.eq_rows.size(); ++i) red.eq_lp[i] = red.eq_full[red.eq_rows[i]];
  for (std::size_t i = 0; i < red.ineq_rows.size(); ++i) red.ineq_lp[i] = red.ineq_full[red.ineq_rows[i]];
  ++lp_solves_;
  return red.solver->solve(red.eq_lp, red.ineq_lp);
}

double RecourseEvaluator::value(std::span<const double> demand) {
  std::vector<double> key(demand.begin(), demand.end());
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  bool trivial = false;
  lp::LpSolution sol = solve_reduced(demand, trivial);
  const double v = (!trivial && sol.optimal()) ? sol.objective : lp::kInf;
  if (!trivial && sol.status == lp::LpStatus::kNumericalFailure) {
    throw std::runtime_error("second-stage LP failed numerically");
  }
  memo_.emplace(std::move(key), v);
  return v;
}

SecondStageResult RecourseEvaluator::solve(std::span<const double> demand) {
  SecondStageResult result;
  bool trivial = false;
  lp::LpSolution sol = solve_reduced(demand, trivial);
  if (trivial) {
    result.status = lp::LpStatus::kInfeasible;
    return result;
  }
  if (sol.status == lp::LpStatus::kNumericalFailure) {
    throw std::runtime_error("second-stage LP failed numerically");
  }
  result.status = sol.status;
  if (!sol.optimal()) return result;

  const Reduced& red = *reduced_;
  result.value = sol.objective;
  result.flows.assign(form_.cost.size(), 0.0);
  for (std::size_t i = 0; i < red.cols.size(); ++i) result.flows[red.cols[i]] = sol.x[i];
  result.eq_duals.assign(form_.eq.num_rows(), 0.0);
  result.ineq_duals.assign(form_.ineq.num_rows(), 0.0);
  for (std::size_t i = 0; i < red.eq_rows.size(); ++i) result.eq_duals[red.eq_rows[i]] = sol.eq_duals[i];
  for (std::size_t i = 0; i < red.ineq_rows.size(); ++i) result.ineq_duals[red.ineq_rows[i]] = sol.ineq_duals[i];

  // Dual repair for the dropped columns through their (zero right-hand side)
  // channel rows.
  std::vector<double> rc = form_.cost;
  const auto at_mu = form_.eq.transpose_multiply(result.eq_duals);
  const auto dt_lambda = form_.ineq.transpose_multiply(result.ineq_duals);
  for (std::size_t c = 0; c < rc.size(); ++c) rc[c] += at_mu[c] + dt_lambda[c];
  for (std::size_t c = 0; c < rc.size(); ++c) {
    if (rc[c] >= 0.0) continue;
    const std::size_t a = form_.columns[c].arc.value();
    if (design_.arc_capacity(spec_, ArcId(a)) > 0.0) continue;
    const std::size_t row = form_.channel_row(a);
    const double raise = -rc[c];
    result.ineq_duals[row] += raise;
    for (const auto& e : form_.ineq.rows[row]) rc[e.col] += raise * e.value;
  }
  memo_.emplace(std::vector<double>(demand.begin(), demand.end()), result.value);
  return result;
}

double RecourseEvaluator::dual_value(std::span<const double> demand) {
  std::vector<double> eq_rhs, ineq_rhs;
  fill_rhs(spec_, design_, demand, mode_, big_m_, eq_rhs, ineq_rhs);
  const std::size_t me = form_.eq.num_rows();
  const std::size_t mi = form_.ineq.num_rows();
  // min mu'B + lambda'E  s.t.  -(A'mu + D'lambda) <= C; the primal value is
  // the negated optimum.
  lp::LpProblem dual;
  for (std::size_t r = 0; r < me; ++r) dual.add_var(eq_rhs[r], -lp::kInf, lp::kInf);
  for (std::size_t r = 0; r < mi; ++r) dual.add_var(ineq_rhs[r], 0.0, lp::kInf);
  std::vector<std::vector<lp::Term>> cols(form_.cost.size());
  for (std::size_t r = 0; r < me; ++r) {
    for (const auto& e : form_.eq.rows[r]) cols[e.col].push_back({r, -e.value});
  }
  for (std::size_t r = 0; r < mi; ++r) {
    for (const auto& e : form_.ineq.rows[r]) cols[e.col].push_back({me + r, -e.value});
  }
  for (std::size_t c = 0; c < cols.size(); ++c) dual.add_inequality(std::move(cols[c]), form_.cost[c]);
  lp::SimplexOptions options;
  options.feas_tol = tol_.feasibility;
  options.gap_tol = tol_.gap;
  ++lp_solves_;
  lp::LpSolution sol = lp::solve_lp(dual, options);
  switch (sol.status) {
    case lp::LpStatus::kOptimal: return -sol.objective;
    case lp::LpStatus::kUnbounded: return lp::kInf;
    case lp::LpStatus::kInfeasible:
      // Dual infeasible with a feasible primal would mean an unbounded
      // primal, impossible with non-negative costs.
      throw std::runtime_error("dual recourse LP infeasible");
    case lp::LpStatus::kNumericalFailure: break;
  }
  throw std::runtime_error("dual recourse LP failed numerically");
}

SecondStageResult second_stage_value(const NetworkSpec& spec, const Design& design,
                                     std::span<const double> demand, BatteryRhsMode mode, double big_m) {
  RecourseEvaluator eval(spec, design, mode, big_m);
  return eval.solve(demand);
}

}  // namespace uamn
