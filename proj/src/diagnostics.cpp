#include "mkdual/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mkdual {

namespace {

void check_shapes(const CostMatrix& c, const TransportPlan& pi, const PotentialPair& pp) {
  if (c.rows() != pi.rows() || c.cols() != pi.cols() || pp.phi().size() != c.rows() ||
      pp.psi().size() != c.cols())
    throw std::invalid_argument("diagnostics: shape mismatch");
}

MonotonicityCheck fail(std::size_t i, std::size_t j, std::string why) {
  return {false, std::make_pair(i, j), std::move(why)};
}

// Shared body: `inequality_required(i, j)` selects the cells where phi(+)psi <= c is enforced.
template <typename Required>
MonotonicityCheck check_ccm(const CostMatrix& c, const TransportPlan& pi, const PotentialPair& pp,
                            double tol, Required inequality_required) {
  check_shapes(c, pi, pp);
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) {
      const Extended s = pp.sum(i, j);
      const bool charged = pi(i, j) > tol;
      if (charged) {
        if (!c.is_finite(i, j)) return fail(i, j, "plan charges a forbidden cell");
        if (!s.is_finite()) return fail(i, j, "potential is -inf on a charged cell");
        if (std::abs(s.value() - c.finite_value(i, j)) > tol)
          return fail(i, j, "phi+psi != c on the support");
      }
      if (!c.is_finite(i, j) || s.is_neg_inf() || !inequality_required(i, j)) continue;
      if (s.value() > c.finite_value(i, j) + tol) return fail(i, j, "phi+psi > c");
    }
  return {};
}

}  // namespace

MonotonicityCheck check_strong_ccm(const CostMatrix& c, const TransportPlan& pi,
                                   const PotentialPair& pp, double tol) {
  return check_ccm(c, pi, pp, tol, [](std::size_t, std::size_t) { return true; });
}

MonotonicityCheck check_ccm_ae(const CostMatrix& c, const TransportPlan& pi, const PotentialPair& pp,
                               std::span<const TransportPlan> plan_family, double tol) {
  for (const TransportPlan& p : plan_family)
    if (p.rows() != c.rows() || p.cols() != c.cols()) throw std::invalid_argument("diagnostics: shape mismatch");
  return check_ccm(c, pi, pp, tol, [&](std::size_t i, std::size_t j) {
    return std::any_of(plan_family.begin(), plan_family.end(),
                       [&](const TransportPlan& p) { return p.in_support(i, j); });
  });
}

AttainmentReport attainment_certificate(const CostMatrix& c, const TransportPlan& pi,
                                        const PotentialPair& pp, double tol) {
  AttainmentReport r;
  r.cost = transport_cost(c, pi);
  r.j_c = j_c(pp, pi);
  r.ccm = check_strong_ccm(c, pi, pp, tol);
  if (r.cost.is_finite() && r.j_c.is_finite()) {
    r.gap = r.cost.value() - r.j_c.value();
    r.certified = r.ccm.pass && std::abs(r.gap) <= tol;
  }
  return r;
}

std::vector<BoundRow> concrete_bound_check(const RotationInstance& inst, const CostMatrix& c_tilde,
                                           std::span<const PotentialPair> potentials,
                                           const CellFunction& h, int k_max) {
  const auto n = static_cast<std::size_t>(inst.n());
  if (c_tilde.rows() != n || c_tilde.cols() != n || h.rows != n || h.cols != n)
    throw std::invalid_argument("concrete_bound_check: shape mismatch");
  if (k_max < 1 || k_max >= inst.n()) throw std::invalid_argument("concrete_bound_check: k_max must lie in [1, n)");
  const double w = 1.0 / inst.n();
  std::vector<BoundRow> rows;
  for (std::size_t p = 0; p < potentials.size(); ++p) {
    const PotentialPair& pp = potentials[p];
    if (pp.phi().size() != n || pp.psi().size() != n || !pp.all_finite())
      throw std::invalid_argument("concrete_bound_check: potentials must be finite and n-dimensional");
    auto err = [&](std::size_t i, std::size_t j, Extended target) {
      if (!target.is_finite()) throw std::invalid_argument("concrete_bound_check: infinite reference on graph");
      return std::abs(target.value() - pp.sum(i, j).value());
    };
    double base = 0.0;
    for (int i = 0; i < inst.n(); ++i) {
      const auto x = static_cast<std::size_t>(i);
      base += w * err(x, x, c_tilde.at(x, x));
      const auto y = static_cast<std::size_t>(inst.step(i, 1));
      base += w * err(x, y, c_tilde.at(x, y));
    }
    for (int k = 1; k <= k_max; ++k) {
      double lhs = 0.0;
      for (int i = 0; i < inst.n(); ++i) {
        const auto x = static_cast<std::size_t>(i);
        const auto y = static_cast<std::size_t>(inst.step(i, k));
        lhs += w * err(x, y, h.at(x, y));
      }
      const double rhs = k * base;
      rows.push_back({p, k, lhs, rhs, lhs <= rhs + 1e-9});
    }
  }
  return rows;
}

SequenceDiagnostics singular_mass_estimate(const TransportPlan& pi0,
                                           std::span<const PotentialPair> potentials,
                                           const CellFunction& h_ref,
                                           std::span<const double> delta_grid) {
  if (h_ref.rows != pi0.rows() || h_ref.cols != pi0.cols())
    throw std::invalid_argument("singular_mass_estimate: shape mismatch");
  for (std::size_t d = 0; d < delta_grid.size(); ++d)
    if (!(delta_grid[d] > 0.0) || (d > 0 && !(delta_grid[d] < delta_grid[d - 1])))
      throw std::invalid_argument("singular_mass_estimate: delta grid must be positive and decreasing");

  struct Cell {
    double mass;
    double value;  // (phi(+)psi) * pi0
  };
  SequenceDiagnostics out;
  out.delta_grid.assign(delta_grid.begin(), delta_grid.end());
  for (const PotentialPair& pp : potentials) {
    if (pp.phi().size() != pi0.rows() || pp.psi().size() != pi0.cols() || !pp.all_finite())
      throw std::invalid_argument("singular_mass_estimate: potentials must be finite and match pi0");
    double l1 = 0.0, pos = 0.0;
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < pi0.rows(); ++i)
      for (std::size_t j = 0; j < pi0.cols(); ++j) {
        const double m = pi0(i, j);
        if (m == 0.0) continue;
        const Extended h = h_ref.at(i, j);
        if (!h.is_finite()) throw std::invalid_argument("singular_mass_estimate: reference infinite on supp(pi0)");
        const double s = pp.sum(i, j).value();
        l1 += std::abs(s - h.value()) * m;
        pos += std::max(s - h.value(), 0.0) * m;
        cells.push_back({m, s * m});
      }
    out.l1_distances_to_limit.push_back(l1);
    out.positive_part_norms.push_back(pos);
    std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.value < b.value; });

    // Ascending delta so the running max makes the profile monotone; stored in grid order.
    std::vector<double> row(delta_grid.size(), 0.0);
    double running = 0.0;
    for (std::size_t d = delta_grid.size(); d-- > 0;) {
      double taken = 0.0, gain = 0.0;
      for (const Cell& cell : cells) {
        if (cell.value >= 0.0) break;
        if (taken + cell.mass >= delta_grid[d]) continue;
        taken += cell.mass;
        gain -= cell.value;
      }
      running = std::max(running, gain);
      row[d] = running;
    }
    out.profile.push_back(std::move(row));
  }
  if (!out.profile.empty()) {
    out.small_set_profile = out.profile.back();
    if (!out.small_set_profile.empty()) out.singular_mass_estimate = out.small_set_profile.back();
  }
  return out;
}

CellFunction as_cell_function(const CostMatrix& c) {
  CellFunction f{c.rows(), c.cols(), {}};
  f.values.reserve(c.rows() * c.cols());
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) f.values.push_back(c.at(i, j));
  return f;
}

}  // namespace mkdual
