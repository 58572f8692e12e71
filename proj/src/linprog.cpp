#include "uamn/linprog.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "simplex_tableau.hpp"

namespace uamn::lp {

std::size_t LpProblem::add_var(double cost, double lo, double hi) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  return objective.size() - 1;
}

void LpProblem::add_equality(std::vector<Term> terms, double rhs) {
  equalities.push_back({std::move(terms), rhs});
}

void LpProblem::add_inequality(std::vector<Term> terms, double rhs) {
  inequalities.push_back({std::move(terms), rhs});
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kNumericalFailure: return "numerical-failure";
  }
  return "?";
}

namespace detail {

Tableau::Tableau(const LpProblem& problem, const SimplexOptions& options)
    : problem_(problem), options_(options) {
  const std::size_t n = problem.num_vars();
  if (problem.lower.size() != n || problem.upper.size() != n) {
    throw std::invalid_argument("LpProblem: bound vectors must match objective length");
  }

  // Map every original variable onto one or two non-negative columns.
  std::vector<Row> bound_rows;
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = problem.lower[j];
    const double hi = problem.upper[j];
    if (lo > hi) throw std::invalid_argument("LpProblem: lower bound exceeds upper bound");
    VarMap m;
    if (std::isfinite(lo)) {
      m.shift = lo;
      m.pos = structural_++;
      if (std::isfinite(hi)) bound_rows.push_back({{{j, 1.0}}, hi});
    } else if (std::isfinite(hi)) {
      m.shift = hi;
      m.sign = -1.0;
      m.pos = structural_++;
    } else {
      m.pos = structural_++;
      m.neg = structural_++;
    }
    vars_.push_back(m);
  }

  const std::size_t me = problem.equalities.size();
  const std::size_t mi = problem.inequalities.size();
  const std::size_t mb = bound_rows.size();
  m_ = me + mi + mb;
  bound_var_.reserve(mb);
  for (const Row& r : bound_rows) bound_var_.push_back(r.terms.front().var);

  // Column layout: structural | slacks (one per <= row) | artificials.
  slack_begin_ = structural_;
  const std::size_t slacks = mi + mb;
  art_begin_ = slack_begin_ + slacks;
  cols_ = art_begin_ + m_;
  width_ = cols_ + 1;
  t_.assign(m_ * width_, 0.0);
  sign_.assign(m_, 1.0);
  basis_.assign(m_, 0);
  unit_col_.assign(m_, 0);
  is_ineq_.assign(m_, false);

  auto row_of = [&](std::size_t r) -> const Row& {
    if (r < me) return problem.equalities[r];
    if (r < me + mi) return problem.inequalities[r - me];
    return bound_rows[r - me - mi];
  };
  for (std::size_t r = 0; r < m_; ++r) {
    const Row& row = row_of(r);
    double* tr = &t_[r * width_];
    for (const Term& term : row.terms) {
      if (term.var >= n) throw std::invalid_argument("LpProblem: term references unknown variable");
      if (!std::isfinite(term.coef)) throw std::invalid_argument("LpProblem: non-finite coefficient");
      const VarMap& m = vars_[term.var];
      tr[m.pos] += m.sign * term.coef;
      if (m.neg != kNone) tr[m.neg] -= term.coef;
    }
    if (r >= me) {
      is_ineq_[r] = true;
      tr[slack_begin_ + (r - me)] = 1.0;
    }
  }
  rhs_original_.resize(m_);
  for (std::size_t r = 0; r < m_; ++r) rhs_original_[r] = row_of(r).rhs;

  cost_.assign(cols_, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const VarMap& m = vars_[j];
    cost_[m.pos] += m.sign * problem.objective[j];
    if (m.neg != kNone) cost_[m.neg] -= problem.objective[j];
  }
  cost_scale_ = 1.0;
  for (double c : problem.objective) cost_scale_ = std::max(cost_scale_, std::abs(c));
}

double Tableau::transformed_rhs(std::size_t r, double rhs) const {
  // Shift by the lower (or upper) bound offsets of the original variables.
  double value = rhs;
  const std::size_t me = problem_.equalities.size();
  const std::size_t mi = problem_.inequalities.size();
  const std::vector<Term>* terms = nullptr;
  if (r < me) {
    terms = &problem_.equalities[r].terms;
  } else if (r < me + mi) {
    terms = &problem_.inequalities[r - me].terms;
  } else {
    const std::size_t j = bound_var_[r - me - mi];
    return value - vars_[j].shift;
  }
  for (const Term& term : *terms) value -= term.coef * vars_[term.var].shift;
  return value;
}

void Tableau::pivot(std::size_t row, std::size_t col) {
  double* pr = &t_[row * width_];
  const double inv = 1.0 / pr[col];
  for (std::size_t j = 0; j < width_; ++j) pr[j] *= inv;
  pr[col] = 1.0;
  for (std::size_t r = 0; r < m_; ++r) {
    if (r == row) continue;
    double* tr = &t_[r * width_];
    const double f = tr[col];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < width_; ++j) {
      if (pr[j] != 0.0) tr[j] -= f * pr[j];
    }
    tr[col] = 0.0;
  }
  for (std::vector<double>* d : {&d1_, &d2_}) {
    if (d->empty()) continue;
    const double f = (*d)[col];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < width_; ++j) {
      if (pr[j] != 0.0) (*d)[j] -= f * pr[j];
    }
    (*d)[col] = 0.0;
  }
  basis_[row] = col;
  ++iterations_;
}

Tableau::PhaseResult Tableau::run_phase(std::vector<double>& d, bool allow_artificial) {
  const double dtol = 1e-9 * cost_scale_;
  int degenerate_run = 0;
  bool bland = false;
  std::vector<char> is_basic(cols_, 0);
  for (std::size_t r = 0; r < m_; ++r) is_basic[basis_[r]] = 1;

  while (true) {
    if (iterations_ >= options_.max_iterations) return PhaseResult::kIterationLimit;
    const std::size_t limit = allow_artificial ? cols_ : art_begin_;
    std::size_t enter = kNone;
    double best = -dtol;
    for (std::size_t j = 0; j < limit; ++j) {
      if (is_basic[j]) continue;
      if (d[j] < -dtol) {
        if (bland) {
          enter = j;
          break;
        }
        if (d[j] < best) {
          best = d[j];
          enter = j;
        }
      }
    }
    if (enter == kNone) return PhaseResult::kOptimal;

    std::size_t leave = kNone;
    double min_ratio = kInf;
    double leave_pivot = 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      const double a = t_[r * width_ + enter];
      if (a <= options_.pivot_tol) continue;
      const double ratio = std::max(0.0, t_[r * width_ + cols_]) / a;
      const double tie = 1e-12 * (1.0 + min_ratio);
      if (leave == kNone || ratio < min_ratio - tie) {
        leave = r;
        min_ratio = ratio;
        leave_pivot = a;
      } else if (ratio <= min_ratio + tie) {
        const bool take = bland ? basis_[r] < basis_[leave] : a > leave_pivot;
        if (take) {
          leave = r;
          min_ratio = std::min(min_ratio, ratio);
          leave_pivot = a;
        }
      }
    }
    if (leave == kNone) return PhaseResult::kUnbounded;

    if (min_ratio <= 1e-12) {
      if (++degenerate_run >= options_.stall_threshold) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
    is_basic[basis_[leave]] = 0;
    pivot(leave, enter);
    is_basic[enter] = 1;
  }
}

void Tableau::load_rhs(std::span<const double> rhs) {
  for (std::size_t r = 0; r < m_; ++r) {
    t_[r * width_ + cols_] = transformed_rhs(r, rhs[r]);
  }
}

LpSolution Tableau::cold_solve() {
  iterations_ = 0;
  warm_ = false;
  // Reset the constraint block to the original rows (slack/artificial unit
  // columns), flipping rows with negative right-hand sides.
  const std::size_t me = problem_.equalities.size();
  const std::size_t mi = problem_.inequalities.size();
  if (!pristine_.empty()) t_ = pristine_;
  else pristine_ = t_;
  load_rhs(rhs_original_);
  for (std::size_t r = 0; r < m_; ++r) {
    double* tr = &t_[r * width_];
    sign_[r] = 1.0;
    if (tr[cols_] < 0.0) {
      sign_[r] = -1.0;
      for (std::size_t j = 0; j < art_begin_; ++j) tr[j] = -tr[j];
      tr[cols_] = -tr[cols_];
    }
    for (std::size_t j = art_begin_; j < cols_; ++j) tr[j] = 0.0;
    tr[art_begin_ + r] = 1.0;
    const bool slack_basis = is_ineq_[r] && sign_[r] > 0.0;
    basis_[r] = slack_basis ? slack_begin_ + (r - me) : art_begin_ + r;
    unit_col_[r] = basis_[r];
  }
  (void)mi;

  // Phase I: minimise the sum of artificials.
  d1_.assign(width_, 0.0);
  for (std::size_t j = art_begin_; j < cols_; ++j) d1_[j] = 1.0;
  for (std::size_t r = 0; r < m_; ++r) {
    if (basis_[r] < art_begin_) continue;
    const double* tr = &t_[r * width_];
    for (std::size_t j = 0; j < width_; ++j) d1_[j] -= tr[j];
  }
  d2_.assign(width_, 0.0);
  for (std::size_t j = 0; j < cols_; ++j) d2_[j] = cost_[j];

  LpSolution sol;
  const double saved_scale = cost_scale_;
  cost_scale_ = 1.0;
  PhaseResult phase1 = run_phase(d1_, true);
  cost_scale_ = saved_scale;
  if (phase1 == PhaseResult::kIterationLimit) {
    sol.status = LpStatus::kNumericalFailure;
    sol.iterations = iterations_;
    return sol;
  }
  double rhs_scale = 1.0;
  for (std::size_t r = 0; r < m_; ++r) rhs_scale = std::max(rhs_scale, std::abs(t_[r * width_ + cols_]));
  for (double v : rhs_original_) rhs_scale = std::max(rhs_scale, std::abs(v));
  if (-d1_[cols_] > options_.feas_tol * rhs_scale) {
    sol.status = LpStatus::kInfeasible;
    sol.iterations = iterations_;
    d1_.clear();
    return sol;
  }

  // Drive remaining artificials out of the basis where possible.
  for (std::size_t r = 0; r < m_; ++r) {
    if (basis_[r] < art_begin_) continue;
    const double* tr = &t_[r * width_];
    std::size_t col = kNone;
    double best = 1e-7;
    for (std::size_t j = 0; j < art_begin_; ++j) {
      if (std::abs(tr[j]) > best) {
        best = std::abs(tr[j]);
        col = j;
      }
    }
    if (col != kNone) pivot(r, col);
  }
  d1_.clear();

  PhaseResult phase2 = run_phase(d2_, false);
  if (phase2 == PhaseResult::kUnbounded) {
    sol.status = LpStatus::kUnbounded;
    sol.iterations = iterations_;
    return sol;
  }
  if (phase2 == PhaseResult::kIterationLimit) {
    sol.status = LpStatus::kNumericalFailure;
    sol.iterations = iterations_;
    return sol;
  }
  warm_ = true;
  return extract(rhs_original_);
}

LpSolution Tableau::warm_solve(std::span<const double> rhs) {
  if (!warm_) {
    rhs_original_.assign(rhs.begin(), rhs.end());
    return cold_solve();
  }
  iterations_ = 0;
  // New basic values: B^-1 (sign * rhs') read off the unit columns.
  std::vector<double> scaled(m_);
  for (std::size_t r = 0; r < m_; ++r) scaled[r] = sign_[r] * transformed_rhs(r, rhs[r]);
  for (std::size_t r = 0; r < m_; ++r) {
    const double* tr = &t_[r * width_];
    double v = 0.0;
    for (std::size_t q = 0; q < m_; ++q) {
      const double e = tr[unit_col_[q]];
      if (e != 0.0) v += e * scaled[q];
    }
    t_[r * width_ + cols_] = v;
  }
  double rhs_scale = 1.0;
  for (double v : rhs) rhs_scale = std::max(rhs_scale, std::abs(v));
  const double ftol = options_.feas_tol * rhs_scale;

  // Dual simplex on the current (dual feasible) basis.
  std::vector<char> is_basic(cols_, 0);
  for (std::size_t r = 0; r < m_; ++r) is_basic[basis_[r]] = 1;
  LpSolution sol;
  while (true) {
    if (iterations_ >= options_.max_iterations) {
      warm_ = false;
      sol.status = LpStatus::kNumericalFailure;
      return sol;
    }
    std::size_t leave = kNone;
    double worst = -ftol;
    for (std::size_t r = 0; r < m_; ++r) {
      const double v = t_[r * width_ + cols_];
      if (basis_[r] >= art_begin_) {
        // Artificial left in a redundant row: any nonzero value means the
        // new right-hand side is inconsistent.
        if (std::abs(v) > ftol) {
          sol.status = LpStatus::kInfeasible;
          sol.iterations = iterations_;
          rhs_original_.assign(rhs.begin(), rhs.end());
          return sol;
        }
        continue;
      }
      if (v < worst) {
        worst = v;
        leave = r;
      }
    }
    if (leave == kNone) break;
    const double* tr = &t_[leave * width_];
    std::size_t enter = kNone;
    double best_ratio = kInf;
    double best_pivot = 0.0;
    for (std::size_t j = 0; j < art_begin_; ++j) {
      if (is_basic[j]) continue;
      const double a = tr[j];
      if (a >= -options_.pivot_tol) continue;
      const double ratio = std::max(0.0, d2_[j]) / -a;
      if (enter == kNone || ratio < best_ratio - 1e-12 * (1.0 + best_ratio) ||
          (ratio <= best_ratio + 1e-12 * (1.0 + best_ratio) && -a > best_pivot)) {
        enter = j;
        best_ratio = std::min(best_ratio, ratio);
        best_pivot = -a;
      }
    }
    if (enter == kNone) {
      sol.status = LpStatus::kInfeasible;
      sol.iterations = iterations_;
      rhs_original_.assign(rhs.begin(), rhs.end());
      return sol;
    }
    is_basic[basis_[leave]] = 0;
    pivot(leave, enter);
    is_basic[enter] = 1;
  }
  rhs_original_.assign(rhs.begin(), rhs.end());
  return extract(rhs_original_);
}

LpSolution Tableau::extract(std::span<const double> rhs) {
  LpSolution sol;
  sol.status = LpStatus::kOptimal;
  sol.iterations = iterations_;
  const std::size_t n = problem_.num_vars();
  std::vector<double> col_value(cols_, 0.0);
  for (std::size_t r = 0; r < m_; ++r) col_value[basis_[r]] = std::max(0.0, t_[r * width_ + cols_]);
  sol.x.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const VarMap& m = vars_[j];
    double v = m.shift + m.sign * col_value[m.pos];
    if (m.neg != kNone) v -= col_value[m.neg];
    sol.x[j] = v;
  }
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += problem_.objective[j] * sol.x[j];

  const std::size_t me = problem_.equalities.size();
  const std::size_t mi = problem_.inequalities.size();
  sol.eq_duals.resize(me);
  sol.ineq_duals.resize(mi);
  for (std::size_t r = 0; r < me + mi; ++r) {
    const double y = sign_[r] * -d2_[unit_col_[r]];
    if (r < me) {
      sol.eq_duals[r] = -y;
    } else {
      sol.ineq_duals[r - me] = std::max(0.0, -y);
    }
  }
  sol.reduced_costs = problem_.objective;
  for (std::size_t r = 0; r < me; ++r) {
    for (const Term& t : problem_.equalities[r].terms) sol.reduced_costs[t.var] += sol.eq_duals[r] * t.coef;
  }
  for (std::size_t r = 0; r < mi; ++r) {
    for (const Term& t : problem_.inequalities[r].terms) sol.reduced_costs[t.var] += sol.ineq_duals[r] * t.coef;
  }

  // Guard against accumulated round-off: verify primal feasibility in the
  // original space.
  double scale = 1.0;
  for (double v : rhs) scale = std::max(scale, std::abs(v));
  for (double v : sol.x) scale = std::max(scale, std::abs(v));
  const double tol = 1e3 * options_.feas_tol * scale;
  auto activity = [&](const Row& row) {
    double s = 0.0;
    for (const Term& t : row.terms) s += t.coef * sol.x[t.var];
    return s;
  };
  bool ok = true;
  for (std::size_t r = 0; r < me && ok; ++r) ok = std::abs(activity(problem_.equalities[r]) - rhs[r]) <= tol;
  for (std::size_t r = 0; r < mi && ok; ++r) ok = activity(problem_.inequalities[r]) - rhs[me + r] <= tol;
  if (!ok) {
    warm_ = false;
    sol.status = LpStatus::kNumericalFailure;
  }
  return sol;
}

}  // namespace detail

LpSolution solve_lp(const LpProblem& problem, const SimplexOptions& options) {
  detail::Tableau tableau(problem, options);
  LpSolution sol = tableau.cold_solve();
  if (sol.status == LpStatus::kNumericalFailure && options.stall_threshold > 0) {
    // Retry with Bland's rule from the first pivot.
    SimplexOptions strict = options;
    strict.stall_threshold = 0;
    detail::Tableau retry(problem, strict);
    sol = retry.cold_solve();
  }
  return sol;
}

RhsSequenceSolver::RhsSequenceSolver(LpProblem problem, const SimplexOptions& options)
    : problem_(std::move(problem)), options_(options) {}

RhsSequenceSolver::~RhsSequenceSolver() = default;

LpSolution RhsSequenceSolver::solve(std::span<const double> eq_rhs, std::span<const double> ineq_rhs) {
  if (eq_rhs.size() != problem_.equalities.size() || ineq_rhs.size() != problem_.inequalities.size()) {
    throw std::invalid_argument("RhsSequenceSolver: right-hand side dimension mismatch");
  }
  for (std::size_t r = 0; r < eq_rhs.size(); ++r) problem_.equalities[r].rhs = eq_rhs[r];
  for (std::size_t r = 0; r < ineq_rhs.size(); ++r) problem_.inequalities[r].rhs = ineq_rhs[r];
  if (!tableau_) tableau_ = std::make_unique<detail::Tableau>(problem_, options_);
  std::vector<double> rhs(tableau_->num_rows());
  std::copy(eq_rhs.begin(), eq_rhs.end(), rhs.begin());
  std::copy(ineq_rhs.begin(), ineq_rhs.end(), rhs.begin() + static_cast<std::ptrdiff_t>(eq_rhs.size()));
  for (std::size_t r = eq_rhs.size() + ineq_rhs.size(); r < rhs.size(); ++r) {
    rhs[r] = tableau_->bound_rhs(r);
  }
  LpSolution sol = tableau_->warm_solve(rhs);
  if (sol.status == LpStatus::kNumericalFailure) {
    sol = solve_lp(problem_, options_);
    tableau_.reset();
  }
  ++solves_;
  return sol;
}

}  // namespace uamn::lp
