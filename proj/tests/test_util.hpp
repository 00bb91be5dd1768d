#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "mkdual/transport.hpp"

namespace mkdual::testing {

struct RandomInstance {
  CostMatrix cost;
  Marginal mu;
  Marginal nu;
};

/// Marginal with integer weights 1..4 over their total, so sums are exact-ish rationals.
inline Marginal random_marginal(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> w(1, 4);
  std::vector<int> ints(n);
  int total = 0;
  for (int& v : ints) total += (v = w(rng));
  std::vector<double> out;
  for (int v : ints) out.push_back(static_cast<double>(v) / total);
  return Marginal(std::move(out));
}

/// Random cost with integer entries in [0, 9]; each cell is forbidden with probability `p_inf`.
/// With p_inf > 0 the instance may be infeasible.
inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double p_inf = 0.0) {
  std::uniform_int_distribution<int> cost(0, 9);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Extended> e;
  for (std::size_t k = 0; k < rows * cols; ++k)
    e.push_back(coin(rng) < p_inf ? Extended::infinity() : Extended(static_cast<double>(cost(rng))));
  return {CostMatrix(rows, cols, std::move(e)), random_marginal(rng, rows), random_marginal(rng, cols)};
}

/// Random exact coupling of (mu, nu) by the north-west corner rule applied to shuffled orders.
inline TransportPlan random_coupling(std::mt19937_64& rng, const Marginal& mu, const Marginal& nu) {
  std::vector<std::size_t> ri(mu.size()), ci(nu.size());
  for (std::size_t k = 0; k < ri.size(); ++k) ri[k] = k;
  for (std::size_t k = 0; k < ci.size(); ++k) ci[k] = k;
  std::shuffle(ri.begin(), ri.end(), rng);
  std::shuffle(ci.begin(), ci.end(), rng);
  std::vector<double> a(mu.weights().begin(), mu.weights().end()), b(nu.weights().begin(), nu.weights().end());
  std::vector<double> mass(mu.size() * nu.size(), 0.0);
  std::size_t p = 0, q = 0;
  while (p < ri.size() && q < ci.size()) {
    const double t = std::min(a[ri[p]], b[ci[q]]);
    mass[ri[p] * nu.size() + ci[q]] += t;
    a[ri[p]] -= t;
    b[ci[q]] -= t;
    if (a[ri[p]] <= b[ci[q]]) ++p;
    else ++q;
  }
  return TransportPlan(mu.size(), nu.size(), std::move(mass), PlanKind::ExactCoupling, mu, nu);
}

struct SupportSolve {
  bool independent = false;
  std::optional<std::vector<double>> x;  // set when independent and consistent
};

/// Solves A x = b restricted to the given columns.
inline SupportSolve solve_on_support(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                                     const std::vector<std::size_t>& cols) {
  const std::size_t m = a.size(), k = cols.size();
  std::vector<std::vector<double>> t(m, std::vector<double>(k + 1));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < k; ++c) t[r][c] = a[r][cols[c]];
    t[r][k] = b[r];
  }
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_row(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = rank;
    for (std::size_t r = rank; r < m; ++r)
      if (std::abs(t[r][c]) > std::abs(t[piv][c])) piv = r;
    if (piv >= m || std::abs(t[piv][c]) < 1e-12) return {};
    std::swap(t[piv], t[rank]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == rank) continue;
      const double f = t[r][c] / t[rank][c];
      for (std::size_t cc = 0; cc <= k; ++cc) t[r][cc] -= f * t[rank][cc];
    }
    pivot_row[c] = rank++;
  }
  for (std::size_t r = rank; r < m; ++r)
    if (std::abs(t[r][k]) > 1e-9) return {true, std::nullopt};
  std::vector<double> x(k);
  for (std::size_t c = 0; c < k; ++c) x[c] = t[pivot_row[c]][k] / t[pivot_row[c]][c];
  return {true, std::move(x)};
}

/// Minimum of <c, pi> over the vertices of the transport polytope restricted to finite cells,
/// found by enumerating every independent support set. Returns nullopt when infeasible.
/// Exponential; meant for at most 4x4.
inline std::optional<double> brute_force_primal(const CostMatrix& c, const Marginal& mu, const Marginal& nu) {
  const std::size_t rows = c.rows(), cols = c.cols();
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (c.is_finite(i, j)) cells.push_back(i * cols + j);
  std::vector<std::vector<double>> a(rows + cols, std::vector<double>(rows * cols, 0.0));
  std::vector<double> b(rows + cols);
  for (std::size_t i = 0; i < rows; ++i) b[i] = mu[i];
  for (std::size_t j = 0; j < cols; ++j) b[rows + j] = nu[j];
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      a[i][i * cols + j] = 1.0;
      a[rows + j][i * cols + j] = 1.0;
    }
  const std::size_t max_size = rows + cols - 1;
  std::optional<double> best;
  std::vector<std::size_t> chosen;
  // Depth-first enumeration of subsets of `cells` with size <= max_size.
  auto visit = [&](auto&& self, std::size_t start) -> void {
    if (!chosen.empty()) {
      const auto [independent, x] = solve_on_support(a, b, chosen);
      if (!independent) return;  // no superset is independent either
      if (x && std::all_of(x->begin(), x->end(), [](double v) { return v >= -1e-12; })) {
        double value = 0.0;
        for (std::size_t k = 0; k < chosen.size(); ++k)
          value += (*x)[k] * c.finite_value(chosen[k] / cols, chosen[k] % cols);
        if (!best || value < *best) best = value;
      }
    }
    if (chosen.size() == max_size) return;
    for (std::size_t k = start; k < cells.size(); ++k) {
      chosen.push_back(cells[k]);
      self(self, k + 1);
      chosen.pop_back();
    }
  };
  visit(visit, 0);
  return best;
}

}  // namespace mkdual::testing
