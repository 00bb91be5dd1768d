#include "mkdual/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>

#include "mkdual/dense_simplex.hpp"
#include "mkdual/network_simplex.hpp"

namespace mkdual {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_marginals(const CostMatrix& c, const Marginal& mu, const Marginal& nu) {
  if (mu.size() != c.rows() || nu.size() != c.cols())
    throw std::invalid_argument("cost/marginal shape mismatch");
}

std::vector<TransportArc> finite_arcs(const CostMatrix& c) {
  std::vector<TransportArc> arcs;
  arcs.reserve(c.finite_count());
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j)
      if (c.is_finite(i, j))
        arcs.push_back({static_cast<int>(i), static_cast<int>(j), c.finite_value(i, j)});
  return arcs;
}

std::vector<double> plan_from_arcs(const CostMatrix& c, std::span<const TransportArc> arcs,
                                   std::span<const double> flow) {
  std::vector<double> mass(c.rows() * c.cols(), 0.0);
  for (std::size_t a = 0; a < flow.size() && a < arcs.size(); ++a)
    mass[static_cast<std::size_t>(arcs[a].source) * c.cols() + static_cast<std::size_t>(arcs[a].sink)] =
        flow[a];
  return mass;
}

// Gauge-fixed potential pair from raw LP multipliers.
PotentialPair gauge(std::span<const double> phi, std::span<const double> psi, std::span<const double> mu) {
  double m = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) m += phi[i] * mu[i];
  std::vector<double> a(phi.begin(), phi.end()), b(psi.begin(), psi.end());
  for (double& v : a) v -= m;
  for (double& v : b) v += m;
  return PotentialPair::finite(a, b);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_grid(std::span<const double> grid, bool allow_one) {
  if (grid.empty()) throw std::invalid_argument("epsilon grid is empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double e = grid[k];
    if (!(e > 0.0) || e > 1.0 || (!allow_one && e >= 1.0))
      throw std::invalid_argument("epsilon grid values must lie in (0, 1)");
    if (k > 0 && !(e < grid[k - 1])) throw std::invalid_argument("epsilon grid must be strictly decreasing");
  }
}

double extrapolate(std::span<const double> eps, std::span<const double> vals) {
  const std::size_t n = eps.size();
  if (n == 1) return vals[0];
  const double e1 = eps[n - 2], e0 = eps[n - 1];
  const double slope = (vals[n - 2] - vals[n - 1]) / (e1 - e0);
  return vals[n - 1] - slope * e0;
}

template <typename Solve>
EpsilonSweep run_sweep(std::span<const double> grid, Solve solve) {
  std::vector<std::future<DualityReport>> jobs;
  jobs.reserve(grid.size());
  for (double e : grid) jobs.push_back(std::async(std::launch::async, solve, e));
  EpsilonSweep sweep;
  sweep.epsilons.assign(grid.begin(), grid.end());
  for (auto& job : jobs) {
    DualityReport r = job.get();
    sweep.values.push_back(r.dual_value.value());
    sweep.stats.push_back(r.stats);
  }
  sweep.extrapolated_limit = extrapolate(sweep.epsilons, sweep.values);
  return sweep;
}

void check_pi0(const CostMatrix& c, const TransportPlan& pi0) {
  if (pi0.rows() != c.rows() || pi0.cols() != c.cols())
    throw std::invalid_argument("cost/reference plan shape mismatch");
  if (pi0.kind() != PlanKind::ExactCoupling)
    throw std::invalid_argument("reference plan must be an exact coupling");
  if (!transport_cost(c, pi0).is_finite()) throw std::invalid_argument("reference plan has infinite cost");
}

}  // namespace

DualityReport solve_primal(const CostMatrix& c, const Marginal& mu, const Marginal& nu,
                           const SolverConfig& cfg) {
  check_marginals(c, mu, nu);
  const auto arcs = finite_arcs(c);
  const NetworkSolution sol = solve_transportation(mu.weights(), nu.weights(), arcs, cfg);
  DualityReport r;
  r.optimal_plan = TransportPlan(c.rows(), c.cols(), plan_from_arcs(c, arcs, sol.flow),
                                 PlanKind::ExactCoupling, mu, nu, cfg.feasibility_tol);
  r.primal_value = Extended(sol.cost);
  PotentialPair pp = gauge(sol.source_potential, sol.sink_potential, mu.weights());
  r.dual_value = pp.dual_objective(mu, nu);
  r.optimal_potentials = std::move(pp);
  r.stats = sol.stats;
  return r;
}

namespace {

// Exact-coupling LP over finite cells: rows 0..n-1 are sources, n..n+m-1 sinks.
LinearProgram coupling_lp(const CostMatrix& c, const Marginal& mu, const Marginal& nu,
                          std::vector<std::pair<std::size_t, std::size_t>>& cells) {
  LinearProgram lp;
  const std::size_t n = c.rows(), m = c.cols();
  lp.rows.resize(n + m);
  for (std::size_t i = 0; i < n; ++i) lp.rows[i] = {{}, RowSense::Equal, mu[i]};
  for (std::size_t j = 0; j < m; ++j) lp.rows[n + j] = {{}, RowSense::Equal, nu[j]};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (!c.is_finite(i, j)) continue;
      const int v = lp.add_variable(c.finite_value(i, j), 0.0, kInf);
      lp.rows[i].terms.emplace_back(v, 1.0);
      lp.rows[n + j].terms.emplace_back(v, 1.0);
      cells.emplace_back(i, j);
    }
  return lp;
}

}  // namespace

DualityReport solve_primal_dense(const CostMatrix& c, const Marginal& mu, const Marginal& nu,
                                 const SolverConfig& cfg) {
  check_marginals(c, mu, nu);
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  const LinearProgram lp = coupling_lp(c, mu, nu, cells);
  const LpSolution sol = solve_dense_lp(lp, cfg);
  std::vector<double> mass(c.rows() * c.cols(), 0.0);
  for (std::size_t k = 0; k < cells.size(); ++k)
    mass[cells[k].first * c.cols() + cells[k].second] = std::max(sol.x[k], 0.0);
  DualityReport r;
  r.optimal_plan =
      TransportPlan(c.rows(), c.cols(), std::move(mass), PlanKind::ExactCoupling, mu, nu, cfg.feasibility_tol);
  r.primal_value = Extended(sol.objective);
  const std::span<const double> y(sol.row_duals);
  PotentialPair pp = gauge(y.subspan(0, c.rows()), y.subspan(c.rows()), mu.weights());
  r.dual_value = pp.dual_objective(mu, nu);
  r.optimal_potentials = std::move(pp);
  r.stats = sol.stats;
  return r;
}

DualityReport solve_dual(const CostMatrix& c, const Marginal& mu, const Marginal& nu,
                         const SolverConfig& cfg) {
  DualityReport r = solve_primal_dense(c, mu, nu, cfg);
  const PotentialPair& pp = *r.optimal_potentials;
  // The multipliers must be dual feasible; anything else is an engine fault.
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j)
      if (c.is_finite(i, j) && pp.sum(i, j).value() > c.finite_value(i, j) + 1e3 * cfg.optimality_tol)
        throw SolveError(SolveStatus::Internal, "solve_dual: multipliers violate phi+psi <= c");
  return r;
}

DualityReport solve_partial(const CostMatrix& c, const Marginal& mu, const Marginal& nu, double eps,
                            const SolverConfig& cfg) {
  check_marginals(c, mu, nu);
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("solve_partial: eps must lie in [0, 1]");
  const int n = static_cast<int>(c.rows()), m = static_cast<int>(c.cols());
  auto arcs = finite_arcs(c);
  const std::size_t n_real = arcs.size();
  // Dummy sink n..: untransported source mass; dummy source: unfilled sink demand.
  for (int i = 0; i < n; ++i) arcs.push_back({i, m, 0.0});
  for (int j = 0; j < m; ++j) arcs.push_back({n, j, 0.0});
  arcs.push_back({n, m, 0.0});
  std::vector<double> supply(mu.weights().begin(), mu.weights().end());
  std::vector<double> demand(nu.weights().begin(), nu.weights().end());
  supply.push_back(eps);
  demand.push_back(eps);
  const NetworkSolution sol = solve_transportation(supply, demand, arcs, cfg);

  DualityReport r;
  const std::span<const TransportArc> real(arcs.data(), n_real);
  r.optimal_plan = TransportPlan(c.rows(), c.cols(), plan_from_arcs(c, real, sol.flow),
                                 PlanKind::SubCoupling, mu, nu, cfg.feasibility_tol);
  r.primal_value = Extended(sol.cost);
  const double dual = dot(sol.source_potential, supply) + dot(sol.sink_potential, demand);
  r.dual_value = Extended(dual);
  r.stats = sol.stats;
  return r;
}

DualityReport solve_partial_dense(const CostMatrix& c, const Marginal& mu, const Marginal& nu,
                                  double eps, const SolverConfig& cfg) {
  check_marginals(c, mu, nu);
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("solve_partial: eps must lie in [0, 1]");
  const std::size_t n = c.rows(), m = c.cols();
  LinearProgram lp;
  lp.rows.resize(n + m + 1);
  for (std::size_t i = 0; i < n; ++i) lp.rows[i] = {{}, RowSense::LessEqual, mu[i]};
  for (std::size_t j = 0; j < m; ++j) lp.rows[n + j] = {{}, RowSense::LessEqual, nu[j]};
  lp.rows[n + m] = {{}, RowSense::GreaterEqual, 1.0 - eps};
  std::vector<std::size_t> cell_index;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (!c.is_finite(i, j)) continue;
      const int v = lp.add_variable(c.finite_value(i, j), 0.0, kInf);
      lp.rows[i].terms.emplace_back(v, 1.0);
      lp.rows[n + j].terms.emplace_back(v, 1.0);
      lp.rows[n + m].terms.emplace_back(v, 1.0);
      cell_index.push_back(i * m + j);
    }
  const LpSolution sol = solve_dense_lp(lp, cfg);
  std::vector<double> mass(n * m, 0.0);
  for (std::size_t k = 0; k < cell_index.size(); ++k) mass[cell_index[k]] = std::max(sol.x[k], 0.0);
  DualityReport r;
  r.optimal_plan = TransportPlan(n, m, std::move(mass), PlanKind::SubCoupling, mu, nu, cfg.feasibility_tol);
  r.primal_value = Extended(sol.objective);
  double dual = 0.0;
  for (std::size_t k = 0; k < lp.rows.size(); ++k) dual += sol.row_duals[k] * lp.rows[k].rhs;
  r.dual_value = Extended(dual);
  r.stats = sol.stats;
  return r;
}

EpsilonSweep estimate_p_rel(const CostMatrix& c, const Marginal& mu, const Marginal& nu,
                            std::span<const double> eps_grid, const SolverConfig& cfg) {
  check_grid(eps_grid, false);
  EpsilonSweep sweep = run_sweep(eps_grid, [&](double e) {
    DualityReport r = solve_partial(c, mu, nu, e, cfg);
    r.dual_value = r.primal_value;
    return r;
  });
  for (std::size_t k = 1; k < sweep.values.size(); ++k)
    if (sweep.values[k] < sweep.values[k - 1] - 1e-7) sweep.monotone = false;
  return sweep;
}

DualityReport solve_restricted_primal(const CostMatrix& c, const TransportPlan& pi0,
                                      const SolverConfig& cfg) {
  check_pi0(c, pi0);
  std::vector<TransportArc> arcs;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j)
      if (pi0.in_support(i, j))
        arcs.push_back({static_cast<int>(i), static_cast<int>(j), c.finite_value(i, j)});
  const auto mu = pi0.row_sums();
  const auto nu = pi0.col_sums();
  NetworkSolution sol;
  try {
    sol = solve_transportation(mu, nu, arcs, cfg);
  } catch (const SolveError& e) {
    if (e.status() == SolveStatus::Infeasible)
      throw SolveError(SolveStatus::Internal, "restricted primal infeasible although pi0 is feasible");
    throw;
  }
  DualityReport r;
  r.optimal_plan = TransportPlan::from_mass(c.rows(), c.cols(), plan_from_arcs(c, arcs, sol.flow));
  r.primal_value = Extended(sol.cost);
  PotentialPair pp = gauge(sol.source_potential, sol.sink_potential, mu);
  r.dual_value = Extended(dot(mu, sol.source_potential) + dot(nu, sol.sink_potential));
  r.optimal_potentials = std::move(pp);
  r.stats = sol.stats;
  return r;
}

DualityReport solve_relaxed_dual(const CostMatrix& c, const Marginal& mu, const Marginal& nu,
                                 const TransportPlan& pi0, double eps, const SolverConfig& cfg) {
  check_marginals(c, mu, nu);
  check_pi0(c, pi0);
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("solve_relaxed_dual: eps must be > 0");
  {
    const auto rs = pi0.row_sums(), cs = pi0.col_sums();
    for (std::size_t i = 0; i < rs.size(); ++i)
      if (std::abs(rs[i] - mu[i]) > cfg.feasibility_tol)
        throw std::invalid_argument("solve_relaxed_dual: pi0 row sums differ from mu");
    for (std::size_t j = 0; j < cs.size(); ++j)
      if (std::abs(cs[j] - nu[j]) > cfg.feasibility_tol)
        throw std::invalid_argument("solve_relaxed_dual: pi0 column sums differ from nu");
  }
  const std::size_t n = c.rows(), m = c.cols();
  LinearProgram lp;
  for (std::size_t i = 0; i < n; ++i) lp.add_variable(-mu[i], -kInf, kInf);
  for (std::size_t j = 0; j < m; ++j) lp.add_variable(-nu[j], -kInf, kInf);
  LpRow budget{{}, RowSense::LessEqual, eps};
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (!pi0.in_support(i, j)) continue;
      const int s = lp.add_variable(0.0, 0.0, kInf);
      lp.add_row({{{static_cast<int>(i), 1.0}, {static_cast<int>(n + j), 1.0}, {s, -1.0}},
                  RowSense::LessEqual,
                  c.finite_value(i, j)});
      budget.terms.emplace_back(s, pi0(i, j));
      cells.emplace_back(i, j);
    }
  lp.add_row(std::move(budget));
  const LpSolution sol = solve_dense_lp(lp, cfg);

  DualityReport r;
  const std::span<const double> x(sol.x);
  PotentialPair pp = gauge(x.subspan(0, n), x.subspan(n, m), mu.weights());
  r.dual_value = Extended(-sol.objective);
  // Row multipliers of the cell rows form a coupling w; the budget multiplier is ||dw/dpi0||_inf.
  std::vector<double> w(n * m, 0.0);
  double penalized = 0.0;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const double mass = std::max(-sol.row_duals[k], 0.0);
    w[cells[k].first * m + cells[k].second] = mass;
    penalized += mass * c.finite_value(cells[k].first, cells[k].second);
  }
  penalized += eps * std::max(-sol.row_duals[cells.size()], 0.0);
  r.primal_value = Extended(penalized);
  try {
    r.optimal_plan = TransportPlan::from_mass(n, m, std::move(w));
  } catch (const std::invalid_argument&) {
    // Multipliers not a clean coupling (degenerate basis); values remain valid.
  }
  r.optimal_potentials = std::move(pp);
  r.stats = sol.stats;
  return r;
}

EpsilonSweep estimate_relaxed_dual_limit(const CostMatrix& c, const Marginal& mu,
                                         const Marginal& nu, const TransportPlan& pi0,
                                         std::span<const double> eps_grid, const SolverConfig& cfg) {
  check_grid(eps_grid, true);
  EpsilonSweep sweep =
      run_sweep(eps_grid, [&](double e) { return solve_relaxed_dual(c, mu, nu, pi0, e, cfg); });
  for (std::size_t k = 1; k < sweep.values.size(); ++k)
    if (sweep.values[k] > sweep.values[k - 1] + 1e-7) sweep.monotone = false;
  return sweep;
}

std::vector<PotentialPair> dual_sequence(const CostMatrix& c, const Marginal& mu,
                                         const Marginal& nu, const TransportPlan& pi0,
                                         std::span<const double> eps_list, const SolverConfig& cfg) {
  for (std::size_t k = 0; k < eps_list.size(); ++k)
    if (!(eps_list[k] > 0.0) || (k > 0 && !(eps_list[k] < eps_list[k - 1])))
      throw std::invalid_argument("dual_sequence: eps list must be positive and strictly decreasing");
  std::vector<PotentialPair> out;
  out.reserve(eps_list.size());
  for (double e : eps_list) out.push_back(*solve_relaxed_dual(c, mu, nu, pi0, e, cfg).optimal_potentials);
  return out;
}

}  // namespace mkdual
