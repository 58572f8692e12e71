#pragma once

// Brute-force reference implementations. Nothing here calls into the engine:
// the LP, the vertex enumeration and the lattice walk are coded separately so
// that agreement between the two paths means something.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "uamn/dro.hpp"
#include "uamn/model.hpp"

namespace uamn::oracle {

class SizeCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LpMethod {
  kAuto,          // vertex enumeration when small enough, else simplex
  kVertexEnum,    // enumerate basic solutions of the flow polytope
  kSimplex,       // dense two-phase simplex, Bland's rule
};

// Dense LP  min c'x  s.t.  A x = b,  G x <= h,  x >= 0.
struct DenseLp {
  std::vector<double> cost;
  std::vector<std::vector<double>> eq;
  std::vector<double> eq_rhs;
  std::vector<std::vector<double>> ineq;
  std::vector<double> ineq_rhs;
};

struct DenseResult {
  bool feasible = false;
  double value = 0.0;
  std::vector<double> x;
};

DenseResult solve_dense(const DenseLp& lp, LpMethod method = LpMethod::kAuto);

// Q(design, b). +inf when infeasible.
double oracle_second_stage(const NetworkSpec& spec, const Design& design, std::span<const double> demand,
                           BatteryRhsMode mode, double big_m, LpMethod method = LpMethod::kAuto);

struct WorstCase {
  double value = 0.0;          // Q(b*) - beta * ||b* - ref||_1, +inf when some vertex is infeasible
  double recourse = 0.0;
  double penalty = 0.0;
  std::vector<double> demand;  // b*
  std::uint64_t pattern = 0;   // digit k of the index: 0 sample, 1 upper, 2 lower
};

// All 3^K patterns (K <= 12). Ties: larger value, then smaller penalty,
// then the earlier pattern. kFeasible drops infeasible vertices other than
// the reference.
WorstCase oracle_worst_case(const NetworkSpec& spec, const Design& design, std::span<const double> reference,
                            double beta, std::span<const double> lower, std::span<const double> upper,
                            BatteryRhsMode mode, double big_m, VertexDomain domain = VertexDomain::kBox);

// Exhaustive design search (lattice <= 2^16). Picks the smallest objective;
// ties within 1e-9 relative go to the cheaper investment, then to the
// lexicographically smaller (z, y).
SolveReport oracle_design(const NetworkSpec& spec, const DemandModel& demand, const DroConfig& config);

}  // namespace uamn::oracle
