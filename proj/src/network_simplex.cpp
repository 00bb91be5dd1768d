#include "mkdual/network_simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace mkdual {

namespace {

constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct Arc {
  int tail;
  int head;
  double cost;
  double cap;
  double flow = 0.0;
  bool in_tree = false;
};

// Spanning-tree network simplex over nodes [sources | sinks | root].
// The tree is stored as an adjacency list and re-rooted by a BFS after each
// basis change; fine at the <= 4001 node scale this library accepts.
class NetworkSimplex {
 public:
  NetworkSimplex(std::span<const double> supply, std::span<const double> demand,
                 std::span<const TransportArc> arcs, const SolverConfig& cfg)
      : n_src_(static_cast<int>(supply.size())),
        n_snk_(static_cast<int>(demand.size())),
        root_(n_src_ + n_snk_),
        n_nodes_(root_ + 1),
        n_real_(static_cast<int>(arcs.size())),
        cfg_(cfg) {
    arcs_.reserve(arcs.size() + static_cast<std::size_t>(root_));
    for (const TransportArc& a : arcs) {
      if (a.source < 0 || a.source >= n_src_ || a.sink < 0 || a.sink >= n_snk_)
        throw std::invalid_argument("solve_transportation: arc endpoint out of range");
      if (!std::isfinite(a.cost)) throw std::invalid_argument("solve_transportation: bad cost");
      arcs_.push_back({a.source, n_src_ + a.sink, a.cost, kUnbounded});
    }
    // Artificial basis: source -> root carries the supply, root -> sink the demand.
    for (int i = 0; i < n_src_; ++i) {
      arcs_.push_back({i, root_, 0.0, kUnbounded, supply[static_cast<std::size_t>(i)], true});
    }
    for (int j = 0; j < n_snk_; ++j) {
      arcs_.push_back({root_, n_src_ + j, 0.0, kUnbounded, demand[static_cast<std::size_t>(j)], true});
    }
    tree_adj_.assign(static_cast<std::size_t>(n_nodes_), {});
    for (int a = n_real_; a < static_cast<int>(arcs_.size()); ++a) link(a);
    parent_.assign(static_cast<std::size_t>(n_nodes_), -1);
    parent_arc_.assign(static_cast<std::size_t>(n_nodes_), -1);
    depth_.assign(static_cast<std::size_t>(n_nodes_), 0);
    pot_.assign(static_cast<std::size_t>(n_nodes_), 0.0);
  }

  NetworkSolution run() {
    const auto start = std::chrono::steady_clock::now();
    // Phase 1: minimize artificial flow.
    for (int a = 0; a < static_cast<int>(arcs_.size()); ++a) arcs_[a].cost = is_artificial(a) ? 1.0 : 0.0;
    rebuild_tree();
    iterate();
    double infeasibility = 0.0;
    for (int a = n_real_; a < static_cast<int>(arcs_.size()); ++a) infeasibility += arcs_[a].flow;
    if (infeasibility > cfg_.feasibility_tol)
      throw SolveError(SolveStatus::Infeasible,
                       "transportation problem infeasible: residual artificial flow " +
                           std::to_string(infeasibility));

    // Phase 2: artificial arcs are pinned at zero and may not enter.
    for (int a = n_real_; a < static_cast<int>(arcs_.size()); ++a) {
      arcs_[a].flow = 0.0;
      arcs_[a].cap = 0.0;
      arcs_[a].cost = 0.0;
    }
    for (int a = 0; a < n_real_; ++a) arcs_[a].cost = real_cost(a);
    rebuild_tree();
    iterate();

    NetworkSolution sol;
    sol.flow.resize(static_cast<std::size_t>(n_real_));
    for (int a = 0; a < n_real_; ++a) {
      sol.flow[a] = arcs_[a].flow;
      sol.cost += arcs_[a].flow * arcs_[a].cost;
    }
    sol.source_potential.resize(static_cast<std::size_t>(n_src_));
    sol.sink_potential.resize(static_cast<std::size_t>(n_snk_));
    for (int i = 0; i < n_src_; ++i) sol.source_potential[i] = pot_[i];
    for (int j = 0; j < n_snk_; ++j) sol.sink_potential[j] = -pot_[n_src_ + j];
    stats_.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    sol.stats = stats_;
    return sol;
  }

  void set_real_costs(std::span<const TransportArc> arcs) {
    real_costs_.resize(arcs.size());
    for (std::size_t a = 0; a < arcs.size(); ++a) real_costs_[a] = arcs[a].cost;
  }

 private:
  bool is_artificial(int a) const { return a >= n_real_; }
  double real_cost(int a) const { return real_costs_[static_cast<std::size_t>(a)]; }

  void link(int a) {
    arcs_[a].in_tree = true;
    tree_adj_[arcs_[a].tail].push_back(a);
    tree_adj_[arcs_[a].head].push_back(a);
  }
  void unlink(int a) {
    arcs_[a].in_tree = false;
    for (int v : {arcs_[a].tail, arcs_[a].head}) {
      auto& adj = tree_adj_[v];
      adj.erase(std::find(adj.begin(), adj.end(), a));
    }
  }

  // Root at the artificial node; potentials satisfy cost - pot[tail] + pot[head] = 0 on tree arcs.
  void rebuild_tree() {
    std::vector<int> queue{root_};
    queue.reserve(static_cast<std::size_t>(n_nodes_));
    parent_[root_] = -1;
    parent_arc_[root_] = -1;
    depth_[root_] = 0;
    pot_[root_] = 0.0;
    std::vector<char> seen(static_cast<std::size_t>(n_nodes_), 0);
    seen[root_] = 1;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const int u = queue[q];
      for (int a : tree_adj_[u]) {
        const Arc& arc = arcs_[a];
        const int v = arc.tail == u ? arc.head : arc.tail;
        if (seen[v]) continue;
        seen[v] = 1;
        parent_[v] = u;
        parent_arc_[v] = a;
        depth_[v] = depth_[u] + 1;
        pot_[v] = arc.tail == u ? pot_[u] - arc.cost : pot_[u] + arc.cost;
        queue.push_back(v);
      }
    }
    if (static_cast<int>(queue.size()) != n_nodes_)
      throw SolveError(SolveStatus::Internal, "network simplex: basis is not a spanning tree");
  }

  double reduced_cost(int a) const {
    const Arc& arc = arcs_[a];
    return arc.cost - pot_[arc.tail] + pot_[arc.head];
  }

  int price(bool bland) const {
    int best = -1;
    double best_rc = -cfg_.optimality_tol;
    for (int a = 0; a < static_cast<int>(arcs_.size()); ++a) {
      const Arc& arc = arcs_[a];
      if (arc.in_tree || arc.cap <= 0.0) continue;
      const double rc = reduced_cost(a);
      if (rc < best_rc) {
        best = a;
        if (bland) return best;
        best_rc = rc;
      }
    }
    return best;
  }

  struct CycleArc {
    int arc;
    bool forward;
  };

  // Cycle through entering arc tail -> head, closed by the tree path head -> tail.
  std::vector<CycleArc> cycle_of(int entering) const {
    int u = arcs_[entering].head;  // walks head -> apex
    int v = arcs_[entering].tail;  // walks tail -> apex
    std::vector<CycleArc> up, down;
    while (u != v) {
      if (depth_[u] >= depth_[v]) {
        const int a = parent_arc_[u];
        up.push_back({a, arcs_[a].tail == u});
        u = parent_[u];
      } else {
        const int a = parent_arc_[v];
        down.push_back({a, arcs_[a].head == v});
        v = parent_[v];
      }
    }
    std::vector<CycleArc> cycle;
    cycle.reserve(up.size() + down.size() + 1);
    cycle.push_back({entering, true});
    cycle.insert(cycle.end(), up.begin(), up.end());
    cycle.insert(cycle.end(), down.rbegin(), down.rend());
    return cycle;
  }

  void iterate() {
    long degenerate_run = 0;
    const long bland_threshold = 10L * (n_src_ + n_snk_);
    while (true) {
      const bool bland = degenerate_run > bland_threshold;
      const int entering = price(bland);
      if (entering < 0) return;
      if (stats_.iterations >= cfg_.max_iterations)
        throw SolveError(SolveStatus::IterationLimit, "network simplex: iteration limit");
      ++stats_.iterations;

      const auto cycle = cycle_of(entering);
      double theta = kUnbounded;
      for (const auto& [a, fwd] : cycle) {
        const double room = fwd ? arcs_[a].cap - arcs_[a].flow : arcs_[a].flow;
        theta = std::min(theta, std::max(room, 0.0));
      }
      if (theta == kUnbounded)
        throw SolveError(SolveStatus::Unbounded, "network simplex: negative cycle of unbounded capacity");

      // Leaving arc: first blocking arc along the cycle, or the lowest index under Bland.
      int leaving = -1;
      bool leaving_forward = true;
      for (const auto& [a, fwd] : cycle) {
        const double room = std::max(fwd ? arcs_[a].cap - arcs_[a].flow : arcs_[a].flow, 0.0);
        if (room > theta) continue;
        if (leaving < 0 || (bland && a < leaving)) {
          leaving = a;
          leaving_forward = fwd;
        }
        if (!bland) break;
      }

      for (const auto& [a, fwd] : cycle)
        arcs_[a].flow = std::max(arcs_[a].flow + (fwd ? theta : -theta), 0.0);
      arcs_[leaving].flow = leaving_forward ? arcs_[leaving].cap : 0.0;

      if (theta <= 1e-15) {
        ++stats_.degenerate_pivots;
        ++degenerate_run;
      } else {
        degenerate_run = 0;
      }
      if (leaving != entering) {
        ++stats_.pivots;
        unlink(leaving);
        link(entering);
        rebuild_tree();
      }
    }
  }

  int n_src_, n_snk_, root_, n_nodes_, n_real_;
  SolverConfig cfg_;
  std::vector<Arc> arcs_;
  std::vector<double> real_costs_;
  std::vector<std::vector<int>> tree_adj_;
  std::vector<int> parent_, parent_arc_, depth_;
  std::vector<double> pot_;
  SolverStats stats_;
};

}  // namespace

NetworkSolution solve_transportation(std::span<const double> supply,
                                     std::span<const double> demand,
                                     std::span<const TransportArc> arcs, const SolverConfig& cfg) {
  cfg.validate();
  if (supply.empty() || demand.empty())
    throw std::invalid_argument("solve_transportation: empty side");
  for (double s : supply)
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("solve_transportation: bad supply");
  for (double d : demand)
    if (!(d >= 0.0) || !std::isfinite(d)) throw std::invalid_argument("solve_transportation: bad demand");
  const double s_tot = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double d_tot = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (std::abs(s_tot - d_tot) > cfg.feasibility_tol)
    throw std::invalid_argument("solve_transportation: unbalanced supply and demand");
  NetworkSimplex ns(supply, demand, arcs, cfg);
  ns.set_real_costs(arcs);
  return ns.run();
}

}  // namespace mkdual
