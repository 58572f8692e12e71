#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uamn/model.hpp"

namespace uamn {

// Row-wise sparse matrix; enough for desk-scale forms.
struct SparseMatrix {
  struct Entry {
    std::size_t col;
    double value;
  };
  std::size_t cols = 0;
  std::vector<std::vector<Entry>> rows;

  std::size_t num_rows() const { return rows.size(); }
  std::vector<double> multiply(std::span<const double> x) const;
  // y' M, i.e. M' y.
  std::vector<double> transpose_multiply(std::span<const double> y) const;
  double at(std::size_t r, std::size_t c) const;
};

enum class RowKind { kOrigin, kDestination, kTransfer, kChannel, kAirport, kBattery };

struct RowLabel {
  RowKind kind;
  std::size_t pair = 0;  // origin/destination/transfer/battery rows
  std::size_t node = 0;  // origin/destination/transfer/airport rows
  std::size_t arc = 0;   // channel rows
};

struct ColumnLabel {
  OdId pair;
  ArcId arc;
};

// Second-stage LP  min C'x  s.t.  A x = B(b),  D x <= E,  x >= 0
// for one design and one demand vector.
//
// Equality rows: K origin rows, K destination rows, then for each pair the
// transfer rows of every node other than its origin and destination.
// Inequality rows: |A| channel rows, |V| airport rows, |K| battery rows.
// Column of (pair k, arc a) is k * |A| + a.
struct ExtensiveForm {
  std::size_t num_nodes = 0;
  std::size_t num_arcs = 0;
  std::size_t num_pairs = 0;

  std::vector<double> cost;
  SparseMatrix eq;
  std::vector<double> eq_rhs;
  SparseMatrix ineq;
  std::vector<double> ineq_rhs;
  std::vector<ColumnLabel> columns;
  std::vector<RowLabel> eq_rows;
  std::vector<RowLabel> ineq_rows;

  std::size_t column(std::size_t pair, std::size_t arc) const { return pair * num_arcs + arc; }
  std::size_t channel_row(std::size_t arc) const { return arc; }
  std::size_t airport_row(std::size_t node) const { return num_arcs + node; }
  std::size_t battery_row(std::size_t pair) const { return num_arcs + num_nodes + pair; }
};

ExtensiveForm build_extensive_form(const NetworkSpec& spec, const Design& design,
                                   std::span<const double> demand, BatteryRhsMode mode,
                                   double big_m);

// Right-hand sides only; cheaper than rebuilding when b changes.
void fill_rhs(const NetworkSpec& spec, const Design& design, std::span<const double> demand,
              BatteryRhsMode mode, double big_m, std::vector<double>& eq_rhs,
              std::vector<double>& ineq_rhs);

struct ResidualReport {
  double equality = 0.0;   // max |A x - B|
  double channel = 0.0;    // max (D x - E)+ over each row group
  double airport = 0.0;
  double battery = 0.0;
  double negativity = 0.0; // max (-x)+

  double worst() const;
};

ResidualReport evaluate_constraints(const ExtensiveForm& form, std::span<const double> x);

// CPLEX-style LP text, one constraint per line, names from the index maps.
std::string to_lp_text(const ExtensiveForm& form, const NetworkSpec& spec);

}  // namespace uamn
