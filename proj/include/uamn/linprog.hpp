#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace uamn::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
  std::size_t var;
  double coef;
};

struct Row {
  std::vector<Term> terms;
  double rhs = 0.0;
};

// min c'x  s.t.  equalities: a'x = rhs,  inequalities: d'x <= rhs,
// lower <= x <= upper.
struct LpProblem {
  std::vector<double> objective;
  std::vector<Row> equalities;
  std::vector<Row> inequalities;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t num_vars() const { return objective.size(); }
  std::size_t add_var(double cost, double lo = 0.0, double hi = kInf);
  void add_equality(std::vector<Term> terms, double rhs);
  void add_inequality(std::vector<Term> terms, double rhs);
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };

const char* to_string(LpStatus status);

// Dual values follow the convention of the Lagrangian
//   c'x + mu'(A x - B) + lambda'(D x - E),  lambda >= 0,
// so at an optimum of a problem with x >= 0 and no upper bounds
//   c + A'mu + D'lambda >= 0  and  c'x = -mu'B - lambda'E.
struct LpSolution {
  LpStatus status = LpStatus::kNumericalFailure;
  std::vector<double> x;
  double objective = kInf;
  std::vector<double> eq_duals;     // mu
  std::vector<double> ineq_duals;   // lambda
  std::vector<double> reduced_costs;
  int iterations = 0;

  bool optimal() const { return status == LpStatus::kOptimal; }
};

struct SimplexOptions {
  double feas_tol = 1e-7;
  double gap_tol = 1e-6;
  double pivot_tol = 1e-9;
  int max_iterations = 200000;
  int stall_threshold = 30;  // degenerate pivots before switching to Bland
};

LpSolution solve_lp(const LpProblem& problem, const SimplexOptions& options = {});

namespace detail {
class Tableau;
}

// Solves a sequence of LPs that share objective and constraint matrix and
// differ only in right-hand sides. After the first solve each call starts
// from the previous optimal basis (dual simplex), falling back to a cold
// solve if round-off is detected.
class RhsSequenceSolver {
 public:
  explicit RhsSequenceSolver(LpProblem problem, const SimplexOptions& options = {});
  ~RhsSequenceSolver();
  RhsSequenceSolver(const RhsSequenceSolver&) = delete;
  RhsSequenceSolver& operator=(const RhsSequenceSolver&) = delete;

  LpSolution solve(std::span<const double> eq_rhs, std::span<const double> ineq_rhs);
  const LpProblem& problem() const { return problem_; }
  long solves() const { return solves_; }

 private:
  LpProblem problem_;
  SimplexOptions options_;
  std::unique_ptr<detail::Tableau> tableau_;
  long solves_ = 0;
};

struct IntegerVar {
  std::size_t var;
};

struct BranchAndBoundOptions {
  SimplexOptions lp;
  double integrality_tol = 1e-6;
  long max_nodes = 1000000;
};

// Depth-first branch and bound. Every integer variable must have finite
// bounds in the problem. Branches on the most fractional variable, lowest
// index first among ties.
LpSolution solve_bb(const LpProblem& problem, std::span<const std::size_t> integer_vars,
                    const BranchAndBoundOptions& options = {});

}  // namespace uamn::lp
