#pragma once

#include <utility>
#include <vector>

#include "mkdual/lp.hpp"
#include "mkdual/transport.hpp"

namespace mkdual {

enum class RowSense { LessEqual, Equal, GreaterEqual };

struct LpRow {
  std::vector<std::pair<int, double>> terms;  // (variable, coefficient)
  RowSense sense = RowSense::Equal;
  double rhs = 0.0;
};

/// min cost.x  s.t.  rows,  lower <= x <= upper.
/// Bounds may be +-infinity (IEEE); a variable with both bounds infinite is free.
struct LinearProgram {
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<LpRow> rows;

  /// Appends a variable and returns its index.
  int add_variable(double cost, double lower, double upper);
  void add_row(LpRow row) { rows.push_back(std::move(row)); }
  int num_variables() const { return static_cast<int>(cost.size()); }
};

struct LpSolution {
  std::vector<double> x;
  /// Multipliers y with cost - A^T y >= 0 on variables resting at their lower bound.
  std::vector<double> row_duals;
  double objective = 0.0;
  SolverStats stats;
};

/// Two-phase bounded-variable revised simplex with a dense basis inverse.
/// Dantzig pricing, switching to Bland's rule after 10*(rows+cols)
/// consecutive degenerate pivots. Throws SolveError on infeasible,
/// unbounded or iteration-limit termination.
LpSolution solve_dense_lp(const LinearProgram& lp, const SolverConfig& cfg);

}  // namespace mkdual
