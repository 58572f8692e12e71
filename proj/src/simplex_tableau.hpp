#pragma once

// Dense tableau used by solve_lp and RhsSequenceSolver. Internal header.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "uamn/linprog.hpp"

namespace uamn::lp::detail {

class Tableau {
 public:
  Tableau(const LpProblem& problem, const SimplexOptions& options);

  LpSolution cold_solve();
  // Re-solve after a right-hand-side change, starting from the last optimal
  // basis with dual simplex pivots. rhs covers equalities, inequalities and
  // the internal bound rows, in that order.
  LpSolution warm_solve(std::span<const double> rhs);

  std::size_t num_rows() const { return m_; }
  double bound_rhs(std::size_t r) const { return rhs_original_[r]; }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  struct VarMap {
    std::size_t pos = 0;
    std::size_t neg = kNone;  // second column for free variables
    double sign = 1.0;
    double shift = 0.0;
  };

  enum class PhaseResult { kOptimal, kUnbounded, kIterationLimit };

  double transformed_rhs(std::size_t r, double rhs) const;
  void load_rhs(std::span<const double> rhs);
  void pivot(std::size_t row, std::size_t col);
  PhaseResult run_phase(std::vector<double>& d, bool allow_artificial);
  LpSolution extract(std::span<const double> rhs);

  const LpProblem& problem_;
  SimplexOptions options_;
  std::vector<VarMap> vars_;
  std::vector<std::size_t> bound_var_;
  std::size_t structural_ = 0;
  std::size_t slack_begin_ = 0;
  std::size_t art_begin_ = 0;
  std::size_t cols_ = 0;
  std::size_t width_ = 0;
  std::size_t m_ = 0;
  std::vector<double> t_;
  std::vector<double> pristine_;
  std::vector<double> cost_;
  std::vector<double> d1_;
  std::vector<double> d2_;
  std::vector<double> sign_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> unit_col_;
  std::vector<bool> is_ineq_;
  std::vector<double> rhs_original_;
  double cost_scale_ = 1.0;
  int iterations_ = 0;
  bool warm_ = false;
};

}  // namespace uamn::lp::detail
