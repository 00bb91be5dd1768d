#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mkdual/rotation.hpp"
#include "mkdual/transport.hpp"

namespace mkdual {

struct MonotonicityCheck {
  bool pass = true;
  /// First violating cell, if any.
  std::optional<std::pair<std::size_t, std::size_t>> witness;
  std::string reason;
};

/// phi(+)psi <= c + tol on every finite cell and |phi(+)psi - c| <= tol where pi > tol.
MonotonicityCheck check_strong_ccm(const CostMatrix& c, const TransportPlan& pi,
                                   const PotentialPair& pp, double tol);

/// As check_strong_ccm, but the inequality is only required on the union of
/// the supports of `plan_family`.
MonotonicityCheck check_ccm_ae(const CostMatrix& c, const TransportPlan& pi, const PotentialPair& pp,
                               std::span<const TransportPlan> plan_family, double tol);

struct AttainmentReport {
  Extended j_c;
  Extended cost;
  MonotonicityCheck ccm;
  bool certified = false;
  /// cost - j_c when both finite.
  double gap = 0.0;
};

AttainmentReport attainment_certificate(const CostMatrix& c, const TransportPlan& pi,
                                        const PotentialPair& pp, double tol);

struct BoundRow {
  std::size_t sequence_index = 0;
  int k = 0;
  double lhs = 0.0;  // ||h - phi(+)psi||_{L1(pi_k)}
  double rhs = 0.0;  // k * ||c~ - phi(+)psi||_{L1(pi_0 + pi_1)}
  bool pass = false;
};

/// Telescoping bound between the graph-k error and the base error on the two-graph
/// cost, for every sequence element and 1 <= k <= k_max.
std::vector<BoundRow> concrete_bound_check(const RotationInstance& inst, const CostMatrix& c_tilde,
                                           std::span<const PotentialPair> potentials,
                                           const CellFunction& h, int k_max);

struct SequenceDiagnostics {
  std::vector<double> l1_distances_to_limit;  // per sequence element
  std::vector<double> positive_part_norms;    // per sequence element
  std::vector<double> delta_grid;
  /// profile[n][d]: escaping negative mass of element n on sets of pi0-mass < delta_grid[d].
  std::vector<std::vector<double>> profile;
  /// profile of the last sequence element, per delta.
  std::vector<double> small_set_profile;
  /// last element at the smallest delta.
  double singular_mass_estimate = 0.0;
};

/// For each potential pair and delta: the greedy maximum of
/// -sum_A (phi(+)psi) pi0 over cell sets A with pi0(A) < delta, made monotone in
/// delta by a running max over the grid.
SequenceDiagnostics singular_mass_estimate(const TransportPlan& pi0,
                                           std::span<const PotentialPair> potentials,
                                           const CellFunction& h_ref,
                                           std::span<const double> delta_grid);

/// Reference function from a cost matrix (for explicit instances).
CellFunction as_cell_function(const CostMatrix& c);

}  // namespace mkdual
