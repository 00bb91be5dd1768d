#pragma once

#include <span>
#include <vector>

#include "mkdual/lp.hpp"
#include "mkdual/transport.hpp"

namespace mkdual {

/// Values of a one-parameter family of LPs over a decreasing epsilon grid.
struct EpsilonSweep {
  std::vector<double> epsilons;  // strictly decreasing, in (0, 1]
  std::vector<double> values;
  std::vector<SolverStats> stats;
  /// Value at epsilon = 0 of the line through the two smallest-epsilon points.
  double extrapolated_limit = 0.0;
  /// Whether values move in the direction the family guarantees.
  bool monotone = true;
};

/// Min <c, pi> over exact couplings of (mu, nu) avoiding +inf cells, by
/// network simplex. Returns the plan and gauge-fixed LP potentials.
DualityReport solve_primal(const CostMatrix& c, const Marginal& mu, const Marginal& nu,
                           const SolverConfig& cfg = {});

/// Max sum(phi mu) + sum(psi nu) subject to phi(+)psi <= c on finite cells.
/// Solved by the dense simplex engine, independently of solve_primal.
DualityReport solve_dual(const CostMatrix& c, const Marginal& mu, const Marginal& nu,
                         const SolverConfig& cfg = {});

/// Dense-simplex solve of the exact-coupling LP (cross-check engine).
DualityReport solve_primal_dense(const CostMatrix& c, const Marginal& mu, const Marginal& nu,
                                 const SolverConfig& cfg = {});

/// Partial transport: min <c, pi> over sub-couplings with total mass >= 1 - eps.
/// Network simplex on the problem augmented with one dummy node per side.
DualityReport solve_partial(const CostMatrix& c, const Marginal& mu, const Marginal& nu, double eps,
                            const SolverConfig& cfg = {});

/// Same LP written directly with inequality rows, solved by the dense engine.
DualityReport solve_partial_dense(const CostMatrix& c, const Marginal& mu, const Marginal& nu,
                                  double eps, const SolverConfig& cfg = {});

/// P^eps over a strictly decreasing grid in (0, 1); the limit is the relaxed
/// primal value estimate. Values must be nondecreasing as eps decreases.
EpsilonSweep estimate_p_rel(const CostMatrix& c, const Marginal& mu, const Marginal& nu,
                            std::span<const double> eps_grid, const SolverConfig& cfg = {});

/// Min <c, pi> over exact couplings with the marginals of pi0 and support
/// inside supp(pi0).
DualityReport solve_restricted_primal(const CostMatrix& c, const TransportPlan& pi0,
                                      const SolverConfig& cfg = {});

/// Max sum(phi mu) + sum(psi nu) over finite potentials with
/// sum over supp(pi0) of (phi(+)psi - c)_+ pi0 <= eps.
/// The reported primal side is the LP dual: min <c, w> + eps * ||dw/dpi0||_inf
/// over couplings w supported in supp(pi0), recovered from the row multipliers.
DualityReport solve_relaxed_dual(const CostMatrix& c, const Marginal& mu, const Marginal& nu,
                                 const TransportPlan& pi0, double eps, const SolverConfig& cfg = {});

/// D^(pi0, eps) over a decreasing grid; values must be nonincreasing as eps
/// decreases. The limit estimates D^(pi0).
EpsilonSweep estimate_relaxed_dual_limit(const CostMatrix& c, const Marginal& mu,
                                         const Marginal& nu, const TransportPlan& pi0,
                                         std::span<const double> eps_grid,
                                         const SolverConfig& cfg = {});

/// Optimizing potentials of solve_relaxed_dual for each eps, gauge-fixed by sum(phi mu) = 0.
std::vector<PotentialPair> dual_sequence(const CostMatrix& c, const Marginal& mu,
                                         const Marginal& nu, const TransportPlan& pi0,
                                         std::span<const double> eps_list,
                                         const SolverConfig& cfg = {});

}  // namespace mkdual
