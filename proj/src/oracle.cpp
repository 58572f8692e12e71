#include "uamn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace uamn::oracle {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr double kPivotEps = 1e-9;

double scale_of(const DenseLp& lp) {
  double s = 1.0;
  for (double v : lp.eq_rhs) s = std::max(s, std::abs(v));
  for (double v : lp.ineq_rhs) s = std::max(s, std::abs(v));
  return s;
}

// ---------------------------------------------------------------------------
// Basic-solution enumeration.

// Solves M x = r by Gauss-Jordan with full pivoting. Returns false when the
// system is inconsistent or does not determine x uniquely.
bool solve_square(std::vector<std::vector<double>> m, std::vector<double> r, std::size_t n,
                  std::vector<double>& x) {
  const std::size_t rows = m.size();
  std::vector<std::size_t> col_of(n);
  std::iota(col_of.begin(), col_of.end(), 0);
  std::size_t rank = 0;
  for (std::size_t c = 0; c < n && rank < rows; ++c) {
    std::size_t pr = rows, pc = n;
    double best = kPivotEps;
    for (std::size_t i = rank; i < rows; ++i) {
      for (std::size_t j = rank; j < n; ++j) {
        if (std::abs(m[i][col_of[j]]) > best) {
          best = std::abs(m[i][col_of[j]]);
          pr = i;
          pc = j;
        }
      }
    }
    if (pr == rows) break;
    std::swap(m[pr], m[rank]);
    std::swap(r[pr], r[rank]);
    std::swap(col_of[pc], col_of[rank]);
    const std::size_t col = col_of[rank];
    const double piv = m[rank][col];
    for (std::size_t j = 0; j < n; ++j) m[rank][j] /= piv;
    r[rank] /= piv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == rank || m[i][col] == 0.0) continue;
      const double f = m[i][col];
      for (std::size_t j = 0; j < n; ++j) m[i][j] -= f * m[rank][j];
      r[i] -= f * r[rank];
    }
    ++rank;
  }
  if (rank < n) return false;
  double scale = 1.0;
  for (double v : r) scale = std::max(scale, std::abs(v));
  for (std::size_t i = rank; i < rows; ++i) {
    if (std::abs(r[i]) > 1e-8 * scale) return false;
  }
  x.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) x[col_of[i]] = r[i];
  return true;
}

std::size_t matrix_rank(std::vector<std::vector<double>> m, std::size_t n) {
  std::size_t rank = 0;
  for (std::size_t c = 0; c < n && rank < m.size(); ++c) {
    std::size_t pr = m.size();
    double best = kPivotEps;
    for (std::size_t i = rank; i < m.size(); ++i) {
      if (std::abs(m[i][c]) > best) {
        best = std::abs(m[i][c]);
        pr = i;
      }
    }
    if (pr == m.size()) continue;
    std::swap(m[pr], m[rank]);
    for (std::size_t i = rank + 1; i < m.size(); ++i) {
      const double f = m[i][c] / m[rank][c];
      for (std::size_t j = c; j < n; ++j) m[i][j] -= f * m[rank][j];
    }
    ++rank;
  }
  return rank;
}

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 0; i < k; ++i) r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return r;
}

bool feasible_point(const DenseLp& lp, const std::vector<double>& x, double tol) {
  for (double v : x) {
    if (v < -tol) return false;
  }
  for (std::size_t i = 0; i < lp.ineq.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += lp.ineq[i][j] * x[j];
    if (s > lp.ineq_rhs[i] + tol) return false;
  }
  for (std::size_t i = 0; i < lp.eq.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += lp.eq[i][j] * x[j];
    if (std::abs(s - lp.eq_rhs[i]) > tol) return false;
  }
  return true;
}

DenseResult vertex_enumeration(const DenseLp& lp) {
  const std::size_t n = lp.cost.size();
  const std::size_t r = matrix_rank(lp.eq, n);
  const std::size_t need = n - r;
  // Candidate tight constraints: every inequality row, then x_j >= 0.
  std::vector<std::vector<double>> cand = lp.ineq;
  std::vector<double> cand_rhs = lp.ineq_rhs;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> row(n, 0.0);
    row[j] = -1.0;
    cand.push_back(std::move(row));
    cand_rhs.push_back(0.0);
  }
  const double tol = 1e-7 * scale_of(lp);
  DenseResult best;
  best.value = kInfinity;
  if (need > cand.size()) return best;
  std::vector<std::size_t> pick(need);
  std::iota(pick.begin(), pick.end(), 0);
  std::vector<double> x;
  while (true) {
    std::vector<std::vector<double>> m = lp.eq;
    std::vector<double> rhs = lp.eq_rhs;
    for (std::size_t p : pick) {
      m.push_back(cand[p]);
      rhs.push_back(cand_rhs[p]);
    }
    if (solve_square(m, rhs, n, x) && feasible_point(lp, x, tol)) {
      double v = 0.0;
      for (std::size_t j = 0; j < n; ++j) v += lp.cost[j] * x[j];
      if (!best.feasible || v < best.value) {
        best.feasible = true;
        best.value = v;
        best.x = x;
      }
    }
    // Next combination in lexicographic order.
    std::size_t i = need;
    while (i > 0 && pick[i - 1] == cand.size() - need + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < need; ++j) pick[j] = pick[j - 1] + 1;
  }
  if (best.feasible) {
    for (double& v : best.x) v = std::max(0.0, v);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Dense two-phase simplex with Bland's rule.

class Tableau {
 public:
  // rows: m constraint rows followed by the objective row; last column is the
  // right-hand side.
  std::vector<std::vector<double>> t;
  std::vector<std::size_t> basis;

  void pivot(std::size_t r, std::size_t c) {
    const double p = t[r][c];
    for (double& v : t[r]) v /= p;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i == r) continue;
      const double f = t[i][c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < t[i].size(); ++j) t[i][j] -= f * t[r][j];
    }
    basis[r] = c;
  }

  // Minimises the objective row over columns [0, usable). Returns false if
  // unbounded.
  bool run(std::size_t usable) {
    const std::size_t m = basis.size();
    const std::size_t rhs = t[0].size() - 1;
    for (int guard = 0; guard < 1000000; ++guard) {
      std::size_t enter = usable;
      for (std::size_t j = 0; j < usable; ++j) {
        if (t[m][j] < -kPivotEps) {
          enter = j;
          break;
        }
      }
      if (enter == usable) return true;
      std::size_t leave = m;
      double ratio = kInfinity;
      for (std::size_t i = 0; i < m; ++i) {
        if (t[i][enter] <= kPivotEps) continue;
        const double q = t[i][rhs] / t[i][enter];
        if (q < ratio - 1e-12 || (q <= ratio + 1e-12 && leave < m && basis[i] < basis[leave])) {
          ratio = q;
          leave = i;
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
    return true;
  }
};

DenseResult simplex(const DenseLp& lp) {
  const std::size_t n = lp.cost.size();
  const std::size_t me = lp.eq.size();
  const std::size_t mi = lp.ineq.size();
  const std::size_t m = me + mi;
  // Columns: x (n), slacks (mi), artificials (m), rhs.
  const std::size_t art0 = n + mi;
  const std::size_t width = art0 + m + 1;
  Tableau tab;
  tab.t.assign(m + 1, std::vector<double>(width, 0.0));
  tab.basis.assign(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    auto& row = tab.t[i];
    const bool is_eq = i < me;
    const auto& src = is_eq ? lp.eq[i] : lp.ineq[i - me];
    const double rhs = is_eq ? lp.eq_rhs[i] : lp.ineq_rhs[i - me];
    const double sign = rhs < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) row[j] = sign * src[j];
    if (!is_eq) row[n + (i - me)] = sign;
    row[art0 + i] = 1.0;
    row[width - 1] = sign * rhs;
    tab.basis[i] = art0 + i;
  }
  // Phase one: minimise the sum of artificials.
  auto& obj = tab.t[m];
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < width; ++j) obj[j] -= tab.t[i][j];
    obj[art0 + i] += 1.0;
  }
  tab.run(art0 + m);
  DenseResult out;
  const double tol = 1e-7 * scale_of(lp);
  if (-obj[width - 1] > tol) return out;
  // Drive artificials out of the basis; rows where that fails are redundant.
  for (std::size_t i = 0; i < tab.basis.size();) {
    if (tab.basis[i] < art0) {
      ++i;
      continue;
    }
    std::size_t col = art0;
    for (std::size_t j = 0; j < art0; ++j) {
      if (std::abs(tab.t[i][j]) > kPivotEps) {
        col = j;
        break;
      }
    }
    if (col < art0) {
      tab.pivot(i, col);
      ++i;
    } else {
      tab.t.erase(tab.t.begin() + static_cast<std::ptrdiff_t>(i));
      tab.basis.erase(tab.basis.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
  const std::size_t rows = tab.basis.size();
  // Phase two objective row.
  auto& obj2 = tab.t[rows];
  std::fill(obj2.begin(), obj2.end(), 0.0);
  for (std::size_t j = 0; j < n; ++j) obj2[j] = lp.cost[j];
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t b = tab.basis[i];
    if (b < n && lp.cost[b] != 0.0) {
      const double f = lp.cost[b];
      for (std::size_t j = 0; j < width; ++j) obj2[j] -= f * tab.t[i][j];
    }
  }
  if (!tab.run(art0)) {
    out.value = -kInfinity;
    return out;
  }
  out.feasible = true;
  out.x.assign(n, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    if (tab.basis[i] < n) out.x[tab.basis[i]] = std::max(0.0, tab.t[i][width - 1]);
  }
  out.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) out.value += lp.cost[j] * out.x[j];
  return out;
}

DenseLp recourse_lp(const NetworkSpec& spec, const Design& design, std::span<const double> demand,
                    BatteryRhsMode mode, double big_m) {
  const std::size_t V = spec.nodes.size();
  const std::size_t A = spec.arcs.size();
  const std::size_t K = spec.od_pairs.size();
  const std::size_t T = spec.channel_types.size();
  if (demand.size() != K) throw std::invalid_argument("oracle: demand dimension mismatch");
  const std::size_t n = K * A;
  auto var = [A](std::size_t k, std::size_t a) { return k * A + a; };
  DenseLp lp;
  lp.cost.resize(n);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t a = 0; a < A; ++a) lp.cost[var(k, a)] = spec.arcs[a].transport_cost[k];
  }
  // Flow balance at every node for every pair.
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < V; ++i) {
      std::vector<double> row(n, 0.0);
      for (std::size_t a = 0; a < A; ++a) {
        if (spec.arcs[a].tail.value() == i) row[var(k, a)] += 1.0;
        if (spec.arcs[a].head.value() == i) row[var(k, a)] -= 1.0;
      }
      double rhs = 0.0;
      if (spec.od_pairs[k].origin.value() == i) rhs = demand[k];
      if (spec.od_pairs[k].destination.value() == i) rhs = -demand[k];
      lp.eq.push_back(std::move(row));
      lp.eq_rhs.push_back(rhs);
    }
  }
  for (std::size_t a = 0; a < A; ++a) {
    std::vector<double> row(n, 0.0);
    for (std::size_t k = 0; k < K; ++k) row[var(k, a)] = 1.0;
    double cap = 0.0;
    for (std::size_t t = 0; t < T; ++t) cap += spec.arcs[a].channels[t].capacity * design.channels[a * T + t];
    lp.ineq.push_back(std::move(row));
    lp.ineq_rhs.push_back(cap);
  }
  for (std::size_t i = 0; i < V; ++i) {
    std::vector<double> row(n, 0.0);
    for (std::size_t a = 0; a < A; ++a) {
      const double touches = (spec.arcs[a].tail.value() == i ? 1.0 : 0.0) + (spec.arcs[a].head.value() == i ? 1.0 : 0.0);
      if (touches == 0.0) continue;
      for (std::size_t k = 0; k < K; ++k) row[var(k, a)] = touches;
    }
    lp.ineq.push_back(std::move(row));
    lp.ineq_rhs.push_back(design.open[i] ? spec.nodes[i].airport_capacity : big_m);
  }
  double open_tails = 0.0, open_nodes = 0.0;
  for (const Arc& arc : spec.arcs) open_tails += design.open[arc.tail.value()] ? 1.0 : 0.0;
  for (auto z : design.open) open_nodes += z ? 1.0 : 0.0;
  const double L = spec.battery_boost;
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> row(n, 0.0);
    double rhs = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
      row[var(k, a)] = spec.arcs[a].energy;
      if (mode == BatteryRhsMode::kFlowWeighted && design.open[spec.arcs[a].tail.value()]) row[var(k, a)] -= L;
    }
    if (mode == BatteryRhsMode::kLiteral) rhs = demand[k] * L * open_tails;
    if (mode == BatteryRhsMode::kNodeSum) rhs = demand[k] * L * open_nodes;
    lp.ineq.push_back(std::move(row));
    lp.ineq_rhs.push_back(rhs);
  }
  return lp;
}

double tie_tol(double v) { return 1e-9 * std::max(1.0, std::abs(v)); }

double oracle_big_m(const NetworkSpec& spec, const DemandModel& demand) {
  if (spec.big_m) return *spec.big_m;
  double total = 0.0;
  for (double w : demand.upper) total += w;
  return 2.0 * total;
}

// Per-sample table of distinct vertex lines (recourse, penalty, pattern).
struct Line {
  double recourse;
  double penalty;
  std::uint64_t pattern;
};

class DesignEvaluator {
 public:
  DesignEvaluator(const NetworkSpec& spec, const Design& design, BatteryRhsMode mode, double big_m)
      : spec_(spec), design_(design), mode_(mode), big_m_(big_m) {}

  double q(const std::vector<double>& b) {
    auto it = memo_.find(b);
    if (it != memo_.end()) return it->second;
    const double v = oracle_second_stage(spec_, design_, b, mode_, big_m_);
    memo_.emplace(b, v);
    return v;
  }

  // Every pattern's line; empty with infeasible = true when a vertex is
  // infeasible. With skip_infeasible only the reference vertex counts and
  // other infeasible vertices are dropped.
  std::vector<Line> lines(std::span<const double> ref, std::span<const double> lower,
                          std::span<const double> upper, bool skip_infeasible, bool& infeasible) {
    const std::size_t K = ref.size();
    std::uint64_t count = 1;
    for (std::size_t k = 0; k < K; ++k) count *= 3;
    std::vector<Line> out;
    infeasible = false;
    for (std::uint64_t p = 0; p < count; ++p) {
      std::vector<double> b(K);
      double rho = 0.0;
      std::uint64_t rest = p;
      for (std::size_t k = 0; k < K; ++k) {
        const std::uint64_t digit = rest % 3;
        rest /= 3;
        b[k] = digit == 0 ? ref[k] : (digit == 1 ? upper[k] : lower[k]);
        rho += std::abs(b[k] - ref[k]);
      }
      const double v = q(b);
      if (std::isinf(v)) {
        if (skip_infeasible && p != 0) continue;
        infeasible = true;
        return {};
      }
      out.push_back({v, rho, p});
    }
    return out;
  }

 private:
  const NetworkSpec& spec_;
  const Design& design_;
  BatteryRhsMode mode_;
  double big_m_;
  std::map<std::vector<double>, double> memo_;
};

std::size_t best_line(const std::vector<Line>& lines, double beta) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const double v = lines[i].recourse - beta * lines[i].penalty;
    const double w = lines[best].recourse - beta * lines[best].penalty;
    if (v > w + tie_tol(w) || (std::abs(v - w) <= tie_tol(w) && lines[i].penalty < lines[best].penalty)) best = i;
  }
  return best;
}

// min over beta >= 0 of mean_j max_v (Q - beta rho) + theta beta, exactly:
// the function is convex piecewise linear, so some breakpoint of a sample's
// upper envelope (or zero) attains the minimum.
double exact_beta(const std::vector<std::vector<Line>>& tables, double theta, double& value) {
  const double n = static_cast<double>(tables.size());
  std::vector<double> candidates{0.0};
  for (const auto& lines : tables) {
    // Upper envelope over beta >= 0: walk from beta = 0 picking the line that
    // stays on top longest.
    double beta = 0.0;
    std::size_t cur = best_line(lines, 0.0);
    while (lines[cur].penalty > 0.0) {
      double next = kInfinity;
      std::size_t nxt = cur;
      for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].penalty >= lines[cur].penalty) continue;
        const double x = (lines[cur].recourse - lines[i].recourse) / (lines[cur].penalty - lines[i].penalty);
        if (x < next || (x == next && lines[i].penalty < lines[nxt].penalty)) {
          next = x;
          nxt = i;
        }
      }
      if (nxt == cur) break;
      beta = std::max(beta, next);
      candidates.push_back(beta);
      cur = nxt;
    }
  }
  auto f = [&](double beta) {
    double total = 0.0;
    for (const auto& lines : tables) {
      double m = -kInfinity;
      for (const Line& l : lines) m = std::max(m, l.recourse - beta * l.penalty);
      total += m;
    }
    return total / n + theta * beta;
  };
  double arg = 0.0;
  value = f(0.0);
  for (double c : candidates) {
    const double v = f(c);
    if (v < value) {
      value = v;
      arg = c;
    }
  }
  return arg;
}

bool lex_less(const Design& a, const Design& b) {
  if (a.open != b.open) return a.open < b.open;
  return a.channels < b.channels;
}

}  // namespace

DenseResult solve_dense(const DenseLp& lp, LpMethod method) {
  const std::size_t n = lp.cost.size();
  if (method == LpMethod::kAuto) {
    method = LpMethod::kSimplex;
    if (n <= 12) {
      const std::size_t r = matrix_rank(lp.eq, n);
      if (binomial(lp.ineq.size() + n, n - r) <= 20000.0) method = LpMethod::kVertexEnum;
    }
  }
  if (method == LpMethod::kVertexEnum) {
    if (n > 16) throw SizeCapExceeded("oracle: vertex enumeration limited to 16 variables");
    return vertex_enumeration(lp);
  }
  return simplex(lp);
}

double oracle_second_stage(const NetworkSpec& spec, const Design& design, std::span<const double> demand,
                           BatteryRhsMode mode, double big_m, LpMethod method) {
  const DenseResult r = solve_dense(recourse_lp(spec, design, demand, mode, big_m), method);
  return r.feasible ? r.value : kInfinity;
}

WorstCase oracle_worst_case(const NetworkSpec& spec, const Design& design, std::span<const double> reference,
                            double beta, std::span<const double> lower, std::span<const double> upper,
                            BatteryRhsMode mode, double big_m, VertexDomain domain) {
  if (reference.size() > 12) throw SizeCapExceeded("oracle: worst case limited to 12 pairs");
  DesignEvaluator eval(spec, design, mode, big_m);
  bool infeasible = false;
  const auto lines = eval.lines(reference, lower, upper, domain == VertexDomain::kFeasible, infeasible);
  WorstCase out;
  if (infeasible) {
    out.value = out.recourse = kInfinity;
    return out;
  }
  const Line& l = lines[best_line(lines, beta)];
  out.pattern = l.pattern;
  out.recourse = l.recourse;
  out.penalty = l.penalty;
  out.value = l.recourse - beta * l.penalty;
  std::uint64_t rest = l.pattern;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    const std::uint64_t digit = rest % 3;
    rest /= 3;
    out.demand.push_back(digit == 0 ? reference[k] : (digit == 1 ? upper[k] : lower[k]));
  }
  return out;
}

SolveReport oracle_design(const NetworkSpec& spec, const DemandModel& demand, const DroConfig& config) {
  const std::size_t V = spec.nodes.size();
  const std::size_t A = spec.arcs.size();
  const std::size_t K = spec.od_pairs.size();
  const std::size_t T = spec.channel_types.size();
  const std::size_t N = demand.samples.size();
  const bool saa = config.mode == SolverMode::kSaa || config.mode == SolverMode::kDeterministic;
  if (config.mode == SolverMode::kDeterministic && N != 1) {
    throw std::invalid_argument("oracle: deterministic mode needs exactly one demand vector");
  }
  const double big_m = oracle_big_m(spec, demand);

  // The lattice: endpoints of pairs with any demand are open, the rest free;
  // channels only between open nodes.
  std::vector<std::uint8_t> forced(V, 0);
  for (std::size_t k = 0; k < K; ++k) {
    if (demand.upper[k] > 0.0 || demand.lower[k] > 0.0) {
      forced[spec.od_pairs[k].origin.value()] = 1;
      forced[spec.od_pairs[k].destination.value()] = 1;
    }
  }
  std::vector<Design> lattice;
  for (std::uint64_t zmask = 0; zmask < (std::uint64_t{1} << V); ++zmask) {
    Design d;
    d.num_types = T;
    d.open.assign(V, 0);
    bool ok = true;
    for (std::size_t i = 0; i < V; ++i) {
      d.open[i] = (zmask >> i) & 1U;
      if (forced[i] && !d.open[i]) ok = false;
    }
    if (!ok) continue;
    std::vector<std::size_t> slots;
    std::vector<int> limit;
    for (std::size_t a = 0; a < A; ++a) {
      if (!d.open[spec.arcs[a].tail.value()] || !d.open[spec.arcs[a].head.value()]) continue;
      for (std::size_t t = 0; t < T; ++t) {
        slots.push_back(a * T + t);
        limit.push_back(config.y_max ? *config.y_max : spec.arcs[a].channels[t].max_channels);
      }
    }
    d.channels.assign(A * T, 0);
    std::vector<int> digits(slots.size(), 0);
    while (true) {
      for (std::size_t s = 0; s < slots.size(); ++s) d.channels[slots[s]] = digits[s];
      lattice.push_back(d);
      if (lattice.size() > (std::size_t{1} << 16)) throw SizeCapExceeded("oracle: design lattice above 2^16");
      std::size_t s = 0;
      while (s < slots.size() && digits[s] == limit[s]) digits[s++] = 0;
      if (s == slots.size()) break;
      ++digits[s];
    }
  }

  auto investment = [&](const Design& d) {
    double total = 0.0;
    for (std::size_t i = 0; i < V; ++i) {
      if (d.open[i]) total += spec.nodes[i].infrastructure_cost + spec.nodes[i].capacity_unit_cost * spec.nodes[i].airport_capacity;
    }
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t t = 0; t < T; ++t) total += spec.arcs[a].channels[t].cost * d.channels[a * T + t];
    }
    return total;
  };
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t i = 0; i < lattice.size(); ++i) order.push_back({investment(lattice[i]), i});
  std::sort(order.begin(), order.end(), [&](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first < y.first;
    return lex_less(lattice[x.second], lattice[y.second]);
  });

  const double fixed_term = (!saa && config.beta_mode == BetaMode::kFixed) ? config.theta * config.beta : 0.0;
  double best = kInfinity;
  double best_inv = 0.0;
  double best_beta = 0.0;
  std::optional<std::size_t> best_idx;
  auto better = [&](double value, double inv, const Design& d) {
    if (!best_idx) return true;
    if (value < best - tie_tol(best)) return true;
    if (value > best + tie_tol(best)) return false;
    if (inv != best_inv) return inv < best_inv;
    return lex_less(d, lattice[*best_idx]);
  };
  for (const auto& [inv, idx] : order) {
    // Recourse is non-negative and the worst case dominates the samples, so
    // investment plus the fixed term is a lower bound.
    if (best_idx && inv + fixed_term > best + tie_tol(best)) break;
    const Design& d = lattice[idx];
    DesignEvaluator eval(spec, d, config.battery, big_m);
    double mean_q = 0.0;
    bool infeasible = false;
    for (const auto& s : demand.samples) {
      const double v = eval.q(s);
      if (std::isinf(v)) {
        infeasible = true;
        break;
      }
      mean_q += v / static_cast<double>(N);
    }
    if (infeasible) continue;
    double value = 0.0;
    double beta = 0.0;
    if (saa) {
      value = inv + mean_q;
    } else {
      if (best_idx && inv + fixed_term + mean_q > best + tie_tol(best)) continue;
      std::vector<std::vector<Line>> tables;
      for (const auto& s : demand.samples) {
        tables.push_back(eval.lines(s, demand.lower, demand.upper, config.theta == 0.0, infeasible));
        if (infeasible) break;
      }
      if (infeasible) continue;
      if (config.beta_mode == BetaMode::kFixed) {
        beta = config.beta;
        double worst = 0.0;
        for (const auto& lines : tables) {
          const Line& l = lines[best_line(lines, beta)];
          worst += l.recourse - beta * l.penalty;
        }
        value = inv + worst / static_cast<double>(N) + fixed_term;
      } else {
        double v = 0.0;
        beta = exact_beta(tables, config.theta, v);
        value = inv + v;
      }
    }
    if (better(value, inv, d)) {
      best = value;
      best_inv = inv;
      best_beta = beta;
      best_idx = idx;
    }
  }

  SolveReport report;
  report.instance = spec.name;
  report.config = config;
  report.mode = config.mode;
  report.diagnostics.lattice_size = lattice.size();
  if (!best_idx) return report;
  report.feasible = true;
  report.design = lattice[*best_idx];
  report.objective = best;
  report.beta = best_beta;
  return report;
}

}  // namespace uamn::oracle
