#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mkdual/transport.hpp"

namespace mkdual {

/// Finite model of an irrational rotation: X = Y = Z_n with uniform
/// marginals, x -> x + shift (mod n), gcd(shift, n) = 1.
class RotationInstance {
 public:
  RotationInstance(int n, int shift);

  /// Shift nearest to n * (sqrt(5) - 1) / 2, moved by +-1, +-2, ... until coprime.
  static RotationInstance auto_golden(int n);

  int n() const { return n_; }
  int shift() const { return shift_; }
  /// i/n in [0, 1/2).
  bool in_upper_half(int i) const { return 2 * i < n_; }
  int step(int i, long k) const;
  Marginal marginal() const { return Marginal::uniform(static_cast<std::size_t>(n_)); }

 private:
  int n_;
  int shift_;
};

struct OrbitState {
  int position = 0;
  long level = 0;
  bool operator==(const OrbitState&) const = default;
};

/// Table of extended reals over X x Y (the function h may be negative).
struct CellFunction {
  std::size_t rows = 0, cols = 0;
  std::vector<Extended> values;
  Extended at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

int g_value(const RotationInstance& inst, int i);

/// 1 + sum_{j<k} g(i + j*shift).
long rho_k(const RotationInstance& inst, int i, long k);

/// Cost of the two-graph example: 1 on the diagonal, 2 / 0 on the shifted
/// graph from the upper / lower half, +inf elsewhere. Requires even n.
CostMatrix build_ap_cost(const RotationInstance& inst);

/// h(i, i + k*shift) = rho_k(i) for 0 <= k <= k_max, +inf elsewhere.
CellFunction build_h(const RotationInstance& inst, int k_max);

/// c = max(h, 0) on the finite cells of h.
CostMatrix build_ex33_cost(const RotationInstance& inst, int k_max);

/// Uniform coupling on the graph of i -> i + k*shift.
TransportPlan gamma_plan(const RotationInstance& inst, long k);

OrbitState skew_step(const RotationInstance& inst, OrbitState st);

/// Smallest k in [1, k_max] with rho_k(i) <= 0.
std::optional<int> first_passage(const RotationInstance& inst, int i, int k_max);

/// Maximum bipartite matching by augmenting paths, seeded with `match`
/// (match[source] = sink or -1). Returns the completed assignment.
std::vector<int> augment_matching(std::span<const std::vector<int>> adjacency, int n_sinks,
                                  std::vector<int> match);

/// Exact coupling supported on the zero-cost cells with k >= 1, by greedy
/// first-passage matching completed with augmenting paths; absent when the
/// zero-cost graph has no perfect matching.
std::optional<TransportPlan> build_zero_cost_plan(const RotationInstance& inst, int k_max);

/// Weights a_0..a_k_max, a_k = 2^-k / max(1, ||h||_{L1(pi_k)}, max_{n<=k} (||phi_n||_1 + ||psi_n||_1)),
/// normalized to sum 1. potentials[p] is the sequence element n = p + 1.
std::vector<double> make_weights(const RotationInstance& inst, int k_max, const CellFunction& h,
                                 std::span<const PotentialPair> potentials);

/// Sum_k weights[k] * gamma_plan(k).
TransportPlan weighted_gamma_plan(const RotationInstance& inst, std::span<const double> weights);

/// Dimension of the affine space of couplings (any marginals fixed) supported
/// on `cells`: #cells - rank of the row/column incidence system.
std::size_t coupling_space_dimension(std::size_t rows, std::size_t cols,
                                     std::span<const std::pair<std::size_t, std::size_t>> cells);

}  // namespace mkdual
