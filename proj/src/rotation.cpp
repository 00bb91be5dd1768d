#include "mkdual/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mkdual {

RotationInstance::RotationInstance(int n, int shift) : n_(n), shift_(shift) {
  if (n < 4) throw std::invalid_argument("RotationInstance: n must be >= 4");
  if (static_cast<std::size_t>(n) > kMaxDimension) throw std::invalid_argument("RotationInstance: n too large");
  if (shift <= 0 || shift >= n) throw std::invalid_argument("RotationInstance: shift must lie in (0, n)");
  if (std::gcd(shift, n) != 1) throw std::invalid_argument("RotationInstance: gcd(shift, n) != 1");
}

RotationInstance RotationInstance::auto_golden(int n) {
  if (n < 4) throw std::invalid_argument("RotationInstance: n must be >= 4");
  const double alpha = (std::sqrt(5.0) - 1.0) / 2.0;
  const int base = static_cast<int>(std::lround(alpha * n));
  for (int d = 0; d < n; ++d) {
    for (int s : {base + d, base - d}) {
      if (s > 0 && s < n && std::gcd(s, n) == 1) return RotationInstance(n, s);
    }
  }
  return RotationInstance(n, 1);
}

int RotationInstance::step(int i, long k) const {
  const long r = (static_cast<long>(i) + (k % n_) * shift_) % n_;
  return static_cast<int>(r < 0 ? r + n_ : r);
}

int g_value(const RotationInstance& inst, int i) {
  if (i < 0 || i >= inst.n()) throw std::out_of_range("g_value: point out of range");
  return inst.in_upper_half(i) ? 1 : -1;
}

long rho_k(const RotationInstance& inst, int i, long k) {
  if (k < 0) throw std::invalid_argument("rho_k: k must be >= 0");
  if (i < 0 || i >= inst.n()) throw std::out_of_range("rho_k: point out of range");
  long r = 1;
  int x = i;
  for (long j = 0; j < k; ++j) {
    r += g_value(inst, x);
    x = inst.step(x, 1);
  }
  return r;
}

CostMatrix build_ap_cost(const RotationInstance& inst) {
  const int n = inst.n();
  if (n % 2 != 0) throw std::invalid_argument("build_ap_cost: n must be even");
  std::vector<Extended> entries(static_cast<std::size_t>(n) * n, Extended::infinity());
  for (int i = 0; i < n; ++i) {
    entries[static_cast<std::size_t>(i) * n + i] = Extended(1.0);
    entries[static_cast<std::size_t>(i) * n + inst.step(i, 1)] = Extended(inst.in_upper_half(i) ? 2.0 : 0.0);
  }
  return CostMatrix(static_cast<std::size_t>(n), static_cast<std::size_t>(n), std::move(entries));
}

CellFunction build_h(const RotationInstance& inst, int k_max) {
  const int n = inst.n();
  if (k_max < 0 || k_max >= n) throw std::invalid_argument("build_h: k_max must lie in [0, n)");
  CellFunction h{static_cast<std::size_t>(n), static_cast<std::size_t>(n),
                 std::vector<Extended>(static_cast<std::size_t>(n) * n, Extended::infinity())};
  for (int i = 0; i < n; ++i) {
    long rho = 1;
    int x = i;  // i + k*shift
    for (int k = 0; k <= k_max; ++k) {
      Extended& cell = h.values[static_cast<std::size_t>(i) * n + x];
      if (!cell.is_pos_inf()) throw std::logic_error("build_h: two graphs share a cell");
      cell = Extended(static_cast<double>(rho));
      rho += g_value(inst, x);
      x = inst.step(x, 1);
    }
  }
  return h;
}

CostMatrix build_ex33_cost(const RotationInstance& inst, int k_max) {
  CellFunction h = build_h(inst, k_max);
  for (Extended& e : h.values)
    if (e.is_finite()) e = Extended(std::max(e.value(), 0.0));
  return CostMatrix(h.rows, h.cols, std::move(h.values));
}

TransportPlan gamma_plan(const RotationInstance& inst, long k) {
  const int n = inst.n();
  std::vector<double> mass(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) mass[static_cast<std::size_t>(i) * n + inst.step(i, k)] = 1.0 / n;
  return TransportPlan::from_mass(static_cast<std::size_t>(n), static_cast<std::size_t>(n), std::move(mass));
}

OrbitState skew_step(const RotationInstance& inst, OrbitState st) {
  return {inst.step(st.position, 1), st.level + g_value(inst, st.position)};
}

std::optional<int> first_passage(const RotationInstance& inst, int i, int k_max) {
  long rho = 1;
  int x = i;
  for (int k = 1; k <= k_max; ++k) {
    rho += g_value(inst, x);
    if (rho <= 0) return k;
    x = inst.step(x, 1);
  }
  return std::nullopt;
}

std::vector<int> augment_matching(std::span<const std::vector<int>> adjacency, int n_sinks,
                                  std::vector<int> match) {
  const int n_src = static_cast<int>(adjacency.size());
  match.resize(static_cast<std::size_t>(n_src), -1);
  std::vector<int> owner(static_cast<std::size_t>(n_sinks), -1);
  for (int i = 0; i < n_src; ++i)
    if (match[i] >= 0) {
      if (owner[match[i]] >= 0) throw std::invalid_argument("augment_matching: seed is not a matching");
      owner[match[i]] = i;
    }
  std::vector<int> visited(static_cast<std::size_t>(n_sinks), -1);
  // Iterative DFS for an augmenting path from each free source.
  for (int root = 0; root < n_src; ++root) {
    if (match[root] >= 0) continue;
    std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
    std::vector<int> via;  // sink used to reach stack[d + 1]
    bool found = false;
    while (!stack.empty() && !found) {
      auto& [u, next] = stack.back();
      if (next == adjacency[u].size()) {
        stack.pop_back();
        if (!via.empty()) via.pop_back();
        continue;
      }
      const int v = adjacency[u][next++];
      if (visited[v] == root) continue;
      visited[v] = root;
      if (owner[v] < 0) {
        via.push_back(v);
        found = true;
        break;
      }
      via.push_back(v);
      stack.emplace_back(owner[v], 0);
    }
    if (!found) continue;
    for (std::size_t d = 0; d < via.size(); ++d) {
      const int u = stack[d].first;
      match[u] = via[d];
      owner[via[d]] = u;
    }
  }
  return match;
}

std::optional<TransportPlan> build_zero_cost_plan(const RotationInstance& inst, int k_max) {
  const int n = inst.n();
  if (k_max < 1 || k_max >= n) throw std::invalid_argument("build_zero_cost_plan: k_max must lie in [1, n)");
  std::vector<std::vector<int>> adjacency(static_cast<std::size_t>(n));
  std::vector<std::pair<int, int>> order;  // (first passage, source)
  for (int i = 0; i < n; ++i) {
    long rho = 1;
    int x = i;
    for (int k = 1; k <= k_max; ++k) {
      rho += g_value(inst, x);
      x = inst.step(x, 1);
      if (rho <= 0) adjacency[i].push_back(x);
    }
    if (const auto fp = first_passage(inst, i, k_max)) order.emplace_back(*fp, i);
  }
  std::sort(order.begin(), order.end());
  std::vector<int> match(static_cast<std::size_t>(n), -1);
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  for (const auto& [k, i] : order) {
    const int target = inst.step(i, k);
    if (taken[target]) continue;
    taken[target] = 1;
    match[i] = target;
  }
  if (std::count(match.begin(), match.end(), -1) > 0) match = augment_matching(adjacency, n, std::move(match));
  if (std::count(match.begin(), match.end(), -1) > 0) return std::nullopt;
  std::vector<double> mass(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) mass[static_cast<std::size_t>(i) * n + match[i]] = 1.0 / n;
  return TransportPlan::from_mass(static_cast<std::size_t>(n), static_cast<std::size_t>(n), std::move(mass));
}

std::vector<double> make_weights(const RotationInstance& inst, int k_max, const CellFunction& h,
                                 std::span<const PotentialPair> potentials) {
  const int n = inst.n();
  if (h.rows != static_cast<std::size_t>(n) || h.cols != static_cast<std::size_t>(n))
    throw std::invalid_argument("make_weights: h shape mismatch");
  if (k_max < 0 || k_max >= n) throw std::invalid_argument("make_weights: k_max must lie in [0, n)");
  const Marginal mu = inst.marginal();
  std::vector<double> seq_norm;
  for (const PotentialPair& pp : potentials) {
    const Extended norm = pp.l1_norm(mu, mu);
    if (!norm.is_finite()) throw std::invalid_argument("make_weights: potentials must be finite");
    seq_norm.push_back(norm.value());
  }
  std::vector<double> a(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) {
    double h_norm = 0.0;
    for (int i = 0; i < n; ++i) {
      const Extended v = h.at(static_cast<std::size_t>(i), static_cast<std::size_t>(inst.step(i, k)));
      if (!v.is_finite()) throw std::invalid_argument("make_weights: h infinite on a graph cell");
      h_norm += std::abs(v.value()) / n;
    }
    double denom = std::max(1.0, h_norm);
    // Condition (b) applies to sequence elements n <= k, i.e. indices p < k.
    for (std::size_t p = 0; p < seq_norm.size() && static_cast<int>(p) + 1 <= k; ++p)
      denom = std::max(denom, seq_norm[p]);
    a[k] = std::ldexp(1.0, -k) / denom;
  }
  const double total = std::accumulate(a.begin(), a.end(), 0.0);
  for (double& v : a) v /= total;
  return a;
}

TransportPlan weighted_gamma_plan(const RotationInstance& inst, std::span<const double> weights) {
  std::vector<TransportPlan> plans;
  plans.reserve(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) plans.push_back(gamma_plan(inst, static_cast<long>(k)));
  return mixture_plan(plans, weights);
}

std::size_t coupling_space_dimension(std::size_t rows, std::size_t cols,
                                     std::span<const std::pair<std::size_t, std::size_t>> cells) {
  // Constraint matrix: one equation per row sum and per column sum, one unknown per cell.
  const std::size_t eqs = rows + cols, vars = cells.size();
  std::vector<double> a(eqs * vars, 0.0);
  for (std::size_t v = 0; v < vars; ++v) {
    const auto [i, j] = cells[v];
    if (i >= rows || j >= cols) throw std::out_of_range("coupling_space_dimension: cell out of range");
    a[i * vars + v] = 1.0;
    a[(rows + j) * vars + v] = 1.0;
  }
  std::size_t rank = 0;
  for (std::size_t col = 0; col < vars && rank < eqs; ++col) {
    std::size_t piv = rank;
    for (std::size_t r = rank + 1; r < eqs; ++r)
      if (std::abs(a[r * vars + col]) > std::abs(a[piv * vars + col])) piv = r;
    if (std::abs(a[piv * vars + col]) < 1e-9) continue;
    for (std::size_t k = 0; k < vars; ++k) std::swap(a[piv * vars + k], a[rank * vars + k]);
    for (std::size_t r = 0; r < eqs; ++r) {
      if (r == rank) continue;
      const double f = a[r * vars + col] / a[rank * vars + col];
      if (f == 0.0) continue;
      for (std::size_t k = col; k < vars; ++k) a[r * vars + k] -= f * a[rank * vars + k];
    }
    ++rank;
  }
  return vars - rank;
}

}  // namespace mkdual
