#include "uamn/extensive_form.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace uamn {

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != cols) throw DimensionError("SparseMatrix::multiply: dimension mismatch");
  std::vector<double> out(rows.size(), 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const Entry& e : rows[r]) out[r] += e.value * x[e.col];
  }
  return out;
}

std::vector<double> SparseMatrix::transpose_multiply(std::span<const double> y) const {
  if (y.size() != rows.size()) throw DimensionError("SparseMatrix::transpose_multiply: dimension mismatch");
  std::vector<double> out(cols, 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (y[r] == 0.0) continue;
    for (const Entry& e : rows[r]) out[e.col] += e.value * y[r];
  }
  return out;
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  double v = 0.0;
  for (const Entry& e : rows.at(r)) {
    if (e.col == c) v += e.value;
  }
  return v;
}

namespace {

double open_tail_arc_count(const NetworkSpec& spec, const Design& design) {
  double count = 0.0;
  for (const Arc& arc : spec.arcs) count += design.open[arc.tail.value()] ? 1.0 : 0.0;
  return count;
}

double open_node_count(const Design& design) {
  double count = 0.0;
  for (auto z : design.open) count += z ? 1.0 : 0.0;
  return count;
}

void check_dimensions(const NetworkSpec& spec, const Design& design, std::span<const double> demand) {
  if (demand.size() != spec.num_pairs()) {
    throw DimensionError("demand vector has " + std::to_string(demand.size()) + " entries, expected " +
                         std::to_string(spec.num_pairs()));
  }
  if (design.open.size() != spec.num_nodes() ||
      design.channels.size() != spec.num_arcs() * spec.num_channel_types()) {
    throw DimensionError("design does not match the network dimensions");
  }
}

}  // namespace

void fill_rhs(const NetworkSpec& spec, const Design& design, std::span<const double> demand,
              BatteryRhsMode mode, double big_m, std::vector<double>& eq_rhs,
              std::vector<double>& ineq_rhs) {
  check_dimensions(spec, design, demand);
  const std::size_t V = spec.num_nodes();
  const std::size_t A = spec.num_arcs();
  const std::size_t K = spec.num_pairs();
  eq_rhs.assign(K * V, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    eq_rhs[k] = demand[k];
    eq_rhs[K + k] = -demand[k];
  }
  ineq_rhs.assign(A + V + K, 0.0);
  for (std::size_t a = 0; a < A; ++a) ineq_rhs[a] = design.arc_capacity(spec, ArcId(a));
  for (std::size_t i = 0; i < V; ++i) {
    ineq_rhs[A + i] = design.open[i] ? spec.nodes[i].airport_capacity : big_m;
  }
  double multiplier = 0.0;
  switch (mode) {
    case BatteryRhsMode::kLiteral: multiplier = open_tail_arc_count(spec, design); break;
    case BatteryRhsMode::kNodeSum: multiplier = open_node_count(design); break;
    case BatteryRhsMode::kFlowWeighted: multiplier = 0.0; break;
  }
  for (std::size_t k = 0; k < K; ++k) {
    ineq_rhs[A + V + k] = demand[k] * spec.battery_boost * multiplier;
  }
}

ExtensiveForm build_extensive_form(const NetworkSpec& spec, const Design& design,
                                   std::span<const double> demand, BatteryRhsMode mode,
                                   double big_m) {
  check_dimensions(spec, design, demand);
  ExtensiveForm form;
  const std::size_t V = form.num_nodes = spec.num_nodes();
  const std::size_t A = form.num_arcs = spec.num_arcs();
  const std::size_t K = form.num_pairs = spec.num_pairs();
  const std::size_t n = K * A;

  form.cost.resize(n);
  form.columns.resize(n);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t a = 0; a < A; ++a) {
      form.cost[form.column(k, a)] = spec.arcs[a].transport_cost[k];
      form.columns[form.column(k, a)] = {OdId(k), ArcId(a)};
    }
  }

  // Equality rows. row_of[k][i] locates node i's conservation row for pair k.
  std::vector<std::vector<std::size_t>> row_of(K, std::vector<std::size_t>(V));
  form.eq_rows.reserve(K * V);
  for (std::size_t k = 0; k < K; ++k) {
    row_of[k][spec.od_pairs[k].origin.value()] = form.eq_rows.size();
    form.eq_rows.push_back({RowKind::kOrigin, k, spec.od_pairs[k].origin.value(), 0});
  }
  for (std::size_t k = 0; k < K; ++k) {
    row_of[k][spec.od_pairs[k].destination.value()] = form.eq_rows.size();
    form.eq_rows.push_back({RowKind::kDestination, k, spec.od_pairs[k].destination.value(), 0});
  }
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < V; ++i) {
      if (i == spec.od_pairs[k].origin.value() || i == spec.od_pairs[k].destination.value()) continue;
      row_of[k][i] = form.eq_rows.size();
      form.eq_rows.push_back({RowKind::kTransfer, k, i, 0});
    }
  }
  form.eq.cols = n;
  form.eq.rows.assign(form.eq_rows.size(), {});
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t a = 0; a < A; ++a) {
      const std::size_t col = form.column(k, a);
      form.eq.rows[row_of[k][spec.arcs[a].tail.value()]].push_back({col, 1.0});
      form.eq.rows[row_of[k][spec.arcs[a].head.value()]].push_back({col, -1.0});
    }
  }
  for (auto& row : form.eq.rows) {
    std::sort(row.begin(), row.end(), [](const auto& l, const auto& r) { return l.col < r.col; });
  }

  // Inequality rows: channel capacity, airport capacity, battery.
  form.ineq.cols = n;
  form.ineq.rows.assign(A + V + K, {});
  form.ineq_rows.reserve(A + V + K);
  for (std::size_t a = 0; a < A; ++a) {
    form.ineq_rows.push_back({RowKind::kChannel, 0, 0, a});
    for (std::size_t k = 0; k < K; ++k) form.ineq.rows[a].push_back({form.column(k, a), 1.0});
  }
  for (std::size_t i = 0; i < V; ++i) form.ineq_rows.push_back({RowKind::kAirport, 0, i, 0});
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t a = 0; a < A; ++a) {
      const std::size_t col = form.column(k, a);
      // In and out flow of every pair count against both endpoints.
      form.ineq.rows[A + spec.arcs[a].tail.value()].push_back({col, 1.0});
      form.ineq.rows[A + spec.arcs[a].head.value()].push_back({col, 1.0});
    }
  }
  for (std::size_t i = 0; i < V; ++i) {
    auto& row = form.ineq.rows[A + i];
    std::sort(row.begin(), row.end(), [](const auto& l, const auto& r) { return l.col < r.col; });
  }
  for (std::size_t k = 0; k < K; ++k) {
    form.ineq_rows.push_back({RowKind::kBattery, k, 0, 0});
    auto& row = form.ineq.rows[A + V + k];
    for (std::size_t a = 0; a < A; ++a) {
      double coef = spec.arcs[a].energy;
      if (mode == BatteryRhsMode::kFlowWeighted && design.open[spec.arcs[a].tail.value()]) {
        coef -= spec.battery_boost;
      }
      if (coef != 0.0) row.push_back({form.column(k, a), coef});
    }
  }

  fill_rhs(spec, design, demand, mode, big_m, form.eq_rhs, form.ineq_rhs);
  return form;
}

double ResidualReport::worst() const {
  return std::max({equality, channel, airport, battery, negativity});
}

ResidualReport evaluate_constraints(const ExtensiveForm& form, std::span<const double> x) {
  if (x.size() != form.cost.size()) throw DimensionError("evaluate_constraints: flow vector dimension mismatch");
  ResidualReport report;
  const auto ax = form.eq.multiply(x);
  for (std::size_t r = 0; r < ax.size(); ++r) {
    report.equality = std::max(report.equality, std::abs(ax[r] - form.eq_rhs[r]));
  }
  const auto dx = form.ineq.multiply(x);
  for (std::size_t r = 0; r < dx.size(); ++r) {
    const double v = std::max(0.0, dx[r] - form.ineq_rhs[r]);
    switch (form.ineq_rows[r].kind) {
      case RowKind::kChannel: report.channel = std::max(report.channel, v); break;
      case RowKind::kAirport: report.airport = std::max(report.airport, v); break;
      default: report.battery = std::max(report.battery, v); break;
    }
  }
  for (double v : x) report.negativity = std::max(report.negativity, -v);
  return report;
}

namespace {

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) c = '_';
  }
  return s;
}

std::string column_name(const ExtensiveForm& form, const NetworkSpec& spec, std::size_t col) {
  const ColumnLabel& c = form.columns[col];
  const Arc& arc = spec.arcs[c.arc.value()];
  return "x_" + sanitize(spec.od_pairs[c.pair.value()].name) + "_" + sanitize(spec.nodes[arc.tail.value()].name) +
         "_" + sanitize(spec.nodes[arc.head.value()].name);
}

std::string row_name(const RowLabel& row, const NetworkSpec& spec) {
  switch (row.kind) {
    case RowKind::kOrigin: return "origin_" + sanitize(spec.od_pairs[row.pair].name);
    case RowKind::kDestination: return "dest_" + sanitize(spec.od_pairs[row.pair].name);
    case RowKind::kTransfer:
      return "transfer_" + sanitize(spec.od_pairs[row.pair].name) + "_" + sanitize(spec.nodes[row.node].name);
    case RowKind::kChannel: {
      const Arc& arc = spec.arcs[row.arc];
      return "channel_" + sanitize(spec.nodes[arc.tail.value()].name) + "_" + sanitize(spec.nodes[arc.head.value()].name);
    }
    case RowKind::kAirport: return "airport_" + sanitize(spec.nodes[row.node].name);
    case RowKind::kBattery: return "battery_" + sanitize(spec.od_pairs[row.pair].name);
  }
  return "row";
}

void write_terms(std::ostringstream& out, const std::vector<SparseMatrix::Entry>& entries,
                 const ExtensiveForm& form, const NetworkSpec& spec) {
  if (entries.empty()) {
    out << " 0 " << column_name(form, spec, 0);
    return;
  }
  for (const auto& e : entries) {
    out << (e.value < 0 ? " - " : " + ") << std::abs(e.value) << " " << column_name(form, spec, e.col);
  }
}

}  // namespace

std::string to_lp_text(const ExtensiveForm& form, const NetworkSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  out << "\\ second-stage flow LP\nMinimize\n obj:";
  for (std::size_t c = 0; c < form.cost.size(); ++c) {
    out << " + " << form.cost[c] << " " << column_name(form, spec, c);
  }
  out << "\nSubject To\n";
  for (std::size_t r = 0; r < form.eq_rows.size(); ++r) {
    out << " " << row_name(form.eq_rows[r], spec) << ":";
    write_terms(out, form.eq.rows[r], form, spec);
    out << " = " << form.eq_rhs[r] << "\n";
  }
  for (std::size_t r = 0; r < form.ineq_rows.size(); ++r) {
    out << " " << row_name(form.ineq_rows[r], spec) << ":";
    write_terms(out, form.ineq.rows[r], form, spec);
    out << " <= " << form.ineq_rhs[r] << "\n";
  }
  out << "End\n";
  return out.str();
}

}  // namespace uamn
