#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uamn/extensive_form.hpp"
#include "uamn/linprog.hpp"
#include "uamn/model.hpp"

namespace uamn {

// ---------------------------------------------------------------------------
// Worst-case demand vertices.

enum class PatternState : std::uint8_t { kZero, kPlus, kMinus };
using VertexPattern = std::vector<PatternState>;

// L1 distance between two demand vectors.
double wasserstein_penalty(std::span<const double> b, std::span<const double> reference);

// Demand vector selected by a pattern: W+ for plus, W- for minus, the
// reference sample for zero.
std::vector<double> pattern_demand(const VertexPattern& pattern, std::span<const double> reference,
                                   std::span<const double> lower, std::span<const double> upper);

// sum_k (W+_k - ref_k) [plus] - (W-_k - ref_k) [minus]; equals the L1
// penalty of pattern_demand when W- <= ref <= W+.
double linearized_penalty(const VertexPattern& pattern, std::span<const double> reference,
                          std::span<const double> lower, std::span<const double> upper);

// Pattern number p in [0, 3^K) with digit k = (p / 3^k) % 3 (0 zero, 1 plus,
// 2 minus). Enumeration runs in increasing p, so the all-zero pattern comes
// first.
VertexPattern decode_pattern(std::uint64_t index, std::size_t num_pairs);
std::uint64_t pattern_count(std::size_t num_pairs);

std::string pattern_string(const VertexPattern& pattern);

// ---------------------------------------------------------------------------
// Second stage.

struct SecondStageResult {
  lp::LpStatus status = lp::LpStatus::kInfeasible;
  double value = lp::kInf;         // +inf when infeasible
  std::vector<double> flows;       // column order of ExtensiveForm
  std::vector<double> eq_duals;    // mu
  std::vector<double> ineq_duals;  // lambda = (channel; airport; battery)

  bool feasible() const { return status == lp::LpStatus::kOptimal; }
};

// Q(design, b) for one design, memoised over demand vectors. The LP drops
// columns of arcs without installed capacity; the duals returned are for
// the full form, with the channel multipliers of dropped arcs raised until
// those columns are dual feasible (their capacity right-hand side is zero,
// so the dual objective is unchanged).
class RecourseEvaluator {
 public:
  RecourseEvaluator(const NetworkSpec& spec, const Design& design, BatteryRhsMode mode, double big_m,
                    Tolerances tol = {});
  ~RecourseEvaluator();

  double value(std::span<const double> demand);
  SecondStageResult solve(std::span<const double> demand);
  // Optimal value of the dual LP  max -mu'B - lambda'E  s.t.
  // C + A'mu + D'lambda >= 0, lambda >= 0. +inf when unbounded.
  double dual_value(std::span<const double> demand);

  const NetworkSpec& spec() const { return spec_; }
  const Design& design() const { return design_; }
  BatteryRhsMode mode() const { return mode_; }
  double big_m() const { return big_m_; }
  long lp_solves() const { return lp_solves_; }

 private:
  struct Reduced;
  lp::LpSolution solve_reduced(std::span<const double> demand, bool& trivially_infeasible);

  const NetworkSpec& spec_;
  Design design_;
  BatteryRhsMode mode_;
  double big_m_;
  Tolerances tol_;
  ExtensiveForm form_;
  std::unique_ptr<Reduced> reduced_;
  std::map<std::vector<double>, double> memo_;
  std::unique_ptr<lp::RhsSequenceSolver> dual_solver_;
  long lp_solves_ = 0;
};

SecondStageResult second_stage_value(const NetworkSpec& spec, const Design& design,
                                     std::span<const double> demand, BatteryRhsMode mode,
                                     double big_m);

// ---------------------------------------------------------------------------
// Per-sample worst case.

struct WorstCaseEntry {
  std::vector<double> demand;  // maximising vertex b*
  VertexPattern pattern;
  double value = lp::kInf;     // Q(b*) - beta * rho
  double recourse = lp::kInf;  // Q(b*)
  double penalty = 0.0;        // rho = ||b* - sample||_1
  bool infeasible = false;     // some vertex has an infeasible second stage
  std::vector<double> flows;   // attaining flows at b*
};

using WorstCaseCertificate = std::vector<WorstCaseEntry>;

// Vertices the worst case ranges over. A positive radius reaches every
// vertex of the demand box, so one infeasible vertex rejects the design.
// At radius zero only the samples themselves must be feasible and
// infeasible vertices are left out.
enum class VertexDomain { kBox, kFeasible };
VertexDomain vertex_domain(double theta);

// All distinct vertices of one sample with their recourse values; the worst
// case for any beta is a max over this table.
struct VertexTable {
  struct Vertex {
    std::uint64_t pattern_index;
    double penalty;
    double recourse;
  };
  std::vector<Vertex> vertices;    // in enumeration order, duplicates of b removed
  std::optional<std::uint64_t> infeasible_pattern;  // set when the design is rejected

  // Index into vertices of the maximiser of recourse - beta * penalty
  // (ties: smaller penalty, then earlier pattern).
  std::size_t argmax(double beta) const;
};

VertexTable build_vertex_table(RecourseEvaluator& eval, std::span<const double> reference,
                               std::span<const double> lower, std::span<const double> upper,
                               VertexDomain domain = VertexDomain::kBox);

WorstCaseEntry worst_case_sample(RecourseEvaluator& eval, std::span<const double> reference, double beta,
                                 std::span<const double> lower, std::span<const double> upper,
                                 WorstCaseStrategy strategy = WorstCaseStrategy::kPrimalEnum,
                                 VertexDomain domain = VertexDomain::kBox);

// Saturation threshold: ||C||_inf * |A| * |K| + 1.
double beta_saturation(const NetworkSpec& spec);

// ---------------------------------------------------------------------------
// Objectives.

struct ObjectiveBreakdown {
  double transport = 0.0;       // mean over samples of Q(b*)
  double penalty = 0.0;         // -beta * mean rho
  double theta_beta = 0.0;
  double channel = 0.0;
  double infrastructure = 0.0;
  double capacity = 0.0;

  double sum() const { return transport + penalty + theta_beta + channel + infrastructure + capacity; }
};

struct DroEvaluation {
  double psi = lp::kInf;
  double beta = 0.0;
  bool feasible = false;
  ObjectiveBreakdown breakdown;
  WorstCaseCertificate certificate;  // one entry per sample, over the pairs of the network passed in
  long lp_solves = 0;
};

// Removes O-D pairs with W- = W+ = 0; they carry no flow in any scenario.
struct ActiveInstance {
  NetworkSpec spec;
  DemandModel demand;
  std::vector<std::size_t> pair_map;  // reduced pair -> original pair
};
ActiveInstance prune_inactive_pairs(const NetworkSpec& spec, const DemandModel& demand);

DroEvaluation dro_objective(const NetworkSpec& spec, const DemandModel& demand, const Design& design,
                            const DroConfig& config);

// (1/N) sum_j Q(b^j) plus investment; +inf on any infeasible sample.
double saa_objective(const NetworkSpec& spec, const DemandModel& demand, const Design& design,
                     BatteryRhsMode mode = BatteryRhsMode::kLiteral);

// Minimises (1/N) sum_j max_v [Q_v - beta rho_v] + theta beta over beta >= 0
// for fixed vertex tables. Returns beta*.
double optimize_beta(std::span<const VertexTable> tables, double theta, double* best_value = nullptr);

// ---------------------------------------------------------------------------
// Design lattice and solvers.

class LatticeTooLarge : public std::runtime_error {
 public:
  LatticeTooLarge(std::uint64_t count, std::uint64_t cap);
  std::uint64_t count;
  std::uint64_t cap;
};

// Admissible designs: nodes that are an origin or destination of an active
// pair are open; every other node is free. A channel may be installed only
// between two open nodes, 0..max_channels per type.
class DesignLattice {
 public:
  DesignLattice(const NetworkSpec& spec, const DemandModel& demand, std::optional<int> y_max = std::nullopt);

  std::uint64_t size() const;  // saturates at UINT64_MAX
  const std::vector<std::size_t>& free_nodes() const { return free_nodes_; }
  const std::vector<std::uint8_t>& forced_open() const { return forced_; }
  int max_channels(std::size_t arc, std::size_t type) const;
  bool admissible(const Design& design) const;
  // Visits every design in lexicographic (z, y) order; stop by returning false.
  void for_each(const std::function<bool(const Design&)>& visit) const;

 private:
  const NetworkSpec& spec_;
  std::vector<std::uint8_t> forced_;
  std::vector<std::size_t> free_nodes_;
  std::vector<int> y_max_;  // per arc*type
};

struct SolverDiagnostics {
  std::uint64_t lattice_size = 0;
  std::uint64_t designs_evaluated = 0;  // full objective evaluations
  std::uint64_t designs_screened = 0;   // rejected by connectivity / feasibility / bounds
  long lp_solves = 0;
  bool post_check_passed = false;
  // Lagrangian path only.
  int iterations = 0;
  double lagrangian_value = 0.0;
  double gap = 0.0;        // (exact - lagrangian) / max(1, |exact|)
  double violation = 0.0;  // dual-feasibility violation of averaged multipliers
  bool converged = false;
  double seconds = 0.0;
};

struct SolveReport {
  std::string instance;
  DroConfig config;
  SolverMode mode = SolverMode::kVertexEnum;
  bool feasible = false;
  Design design;
  double objective = lp::kInf;
  double beta = 0.0;
  ObjectiveBreakdown breakdown;
  // Over the pairs and samples of the original instance; pruned pairs show
  // their zero demand.
  WorstCaseCertificate certificate;
  SolverDiagnostics diagnostics;
};

// Exhaustive search over the lattice for the chosen objective
// (config.mode: vertex-enum, saa or deterministic).
SolveReport solve_enumeration(const NetworkSpec& spec, const DemandModel& demand, const DroConfig& config);

SolveReport solve_lagrangian(const NetworkSpec& spec, const DemandModel& demand, const DroConfig& config);

// Dispatches on config.mode.
SolveReport solve(const NetworkSpec& spec, const DemandModel& demand, const DroConfig& config);

// Evaluates a given design and fills a report (used by `worst-case`).
SolveReport evaluate_design(const NetworkSpec& spec, const DemandModel& demand, const Design& design,
                            const DroConfig& config);

// Nodes that carry flow in any certificate entry but are closed.
std::vector<std::size_t> airport_post_check(const NetworkSpec& spec, const Design& design,
                                            const WorstCaseCertificate& certificate);

// ---------------------------------------------------------------------------
// Lagrangian building blocks, exposed for tests.

struct ArcBlockResult {
  std::vector<int> channels;       // per type, sign rule
  std::vector<double> multipliers; // lambda2 per sample
  double mean_multiplier = 0.0;
  double value = 0.0;
};

// Block (c) for one arc: max over lambda2 in [0, cap]^N of
//   min over y of sum_t (Cd_t - mean(lambda2) u_t) y_t + sum_h lambda2_h load_h
// where load_h is the arc load of sample h's multiplier vector. The channel
// counts follow the sign rule: y_t = y_max iff Cd_t - mean(lambda2) u_t < 0.
ArcBlockResult solve_arc_block(const Arc& arc, std::span<const int> y_max, std::span<const double> loads,
                               double multiplier_cap);

// The sign rule alone for given mean multiplier.
std::vector<int> channel_sign_rule(const Arc& arc, std::span<const int> y_max, double mean_multiplier);

// ---------------------------------------------------------------------------
// Small-scale check of the penalty reformulation (one pair, finite grid).

struct DualityCheckResult {
  double lhs = 0.0;   // worst expectation over the Wasserstein ball (transport LP)
  double rhs = 0.0;   // min over beta of the penalty form
  double beta = 0.0;  // minimiser of the rhs
};

// grid: support points; recourse: Q at each grid point; samples: indices of
// the empirical samples into grid.
DualityCheckResult duality_gap_check(std::span<const double> grid, std::span<const double> recourse,
                                     std::span<const std::size_t> samples, double theta);

}  // namespace uamn
