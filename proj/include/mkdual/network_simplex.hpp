#pragma once

#include <span>
#include <vector>

#include "mkdual/lp.hpp"
#include "mkdual/transport.hpp"

namespace mkdual {

/// Arc of a transportation network, from supply node `source` to demand
/// node `sink`. Forbidden pairs are simply absent.
struct TransportArc {
  int source;
  int sink;
  double cost;
};

struct NetworkSolution {
  std::vector<double> flow;       // one per input arc
  std::vector<double> source_potential;
  std::vector<double> sink_potential;  // u[i] + v[j] <= cost on every arc
  double cost = 0.0;
  SolverStats stats;
};

/// Primal network simplex for the transportation problem
///   min sum cost*flow  s.t. out-flow of source i = supply[i],
///                           in-flow of sink j = demand[j], flow >= 0.
/// Two phases over an artificial root; throws SolveError(Infeasible) when the
/// arcs cannot carry the supplies. Supplies and demands must have equal
/// totals up to feasibility_tol.
NetworkSolution solve_transportation(std::span<const double> supply,
                                     std::span<const double> demand,
                                     std::span<const TransportArc> arcs, const SolverConfig& cfg);

}  // namespace mkdual
