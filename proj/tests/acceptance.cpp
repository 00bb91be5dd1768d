// Acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "mkdual/diagnostics.hpp"
#include "mkdual/io.hpp"
#include "mkdual/rotation.hpp"
#include "mkdual/solvers.hpp"
#include "test_util.hpp"

using namespace mkdual;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail << "failed: ";
    else detail << "; ";
    detail << what;
    pass = false;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.require(secs < limit_s, "runtime " + fmt(secs) + " s exceeds " + fmt(limit_s) + " s");
  if (!out.pass) ++failures;
  std::printf("%s criterion %d: %s [%.2f s] %s\n", out.pass ? "PASS" : "FAIL", id, title, secs,
              out.detail.str().c_str());
  std::fflush(stdout);
}

TransportPlan ap_reference(const RotationInstance& r) {
  const std::vector<TransportPlan> plans{gamma_plan(r, 0), gamma_plan(r, 1)};
  const std::vector<double> w{0.5, 0.5};
  return mixture_plan(plans, w);
}

TransportPlan ex33_reference(const RotationInstance& r, int k_max) {
  const auto w = make_weights(r, 4, build_h(r, k_max), {});
  return weighted_gamma_plan(r, w);
}

}  // namespace

int main() {
  criterion(1, "AP value reproduction (n = 8, 24, 144)", 5.0, [](Outcome& o) {
    for (int n : {8, 24, 144}) {
      const RotationInstance r = RotationInstance::auto_golden(n);
      const CostMatrix c = build_ap_cost(r);
      const double p = solve_primal(c, r.marginal(), r.marginal()).primal_value.value();
      const double d = solve_dual(c, r.marginal(), r.marginal()).dual_value.value();
      o.detail << "n=" << n << " P=" << fmt(p) << " D=" << fmt(d) << " ";
      o.require(std::abs(p - 1.0) <= 1e-7, "P != 1 at n=" + std::to_string(n));
      o.require(std::abs(d - 1.0) <= 1e-7, "D != 1 at n=" + std::to_string(n));
    }
  });

  criterion(2, "AP plan space is the segment [pi0, pi1] (n = 8, 24)", 1.0, [](Outcome& o) {
    for (int n : {8, 24}) {
      const RotationInstance r = RotationInstance::auto_golden(n);
      const CostMatrix c = build_ap_cost(r);
      std::vector<std::pair<std::size_t, std::size_t>> cells;
      for (std::size_t i = 0; i < c.rows(); ++i)
        for (std::size_t j = 0; j < c.cols(); ++j)
          if (c.is_finite(i, j)) cells.emplace_back(i, j);
      const std::size_t dim = coupling_space_dimension(n, n, cells);
      // pi0 and pi1 are distinct feasible endpoints; with dimension 1 the feasible set is their segment.
      const TransportPlan p0 = gamma_plan(r, 0), p1 = gamma_plan(r, 1);
      const bool distinct = !std::equal(p0.mass().begin(), p0.mass().end(), p1.mass().begin());
      const bool on_graphs = transport_cost(c, p0).is_finite() && transport_cost(c, p1).is_finite();
      o.detail << "n=" << n << " dim=" << dim << " ";
      o.require(dim == 1 && distinct && on_graphs, "plan space is not a segment at n=" + std::to_string(n));
    }
  });

  criterion(3, "ex33 restricted vs global separation (n = 192)", 60.0, [](Outcome& o) {
    std::vector<double> v_full;
    for (int n : {24, 48, 96, 192}) {
      const RotationInstance r = RotationInstance::auto_golden(n);
      const CostMatrix c = build_ex33_cost(r, n - 1);
      v_full.push_back(solve_primal(c, r.marginal(), r.marginal()).primal_value.value());
      o.detail << "V_full(" << n << ")=" << fmt(v_full.back()) << " ";
    }
    for (std::size_t k = 1; k < v_full.size(); ++k) o.require(v_full[k] <= v_full[k - 1] + 1e-9, "V_full increases");
    const RotationInstance r = RotationInstance::auto_golden(192);
    const CostMatrix c = build_ex33_cost(r, 191);
    const double v_restr = solve_restricted_primal(c, ex33_reference(r, 191)).primal_value.value();
    o.detail << "V_restr=" << fmt(v_restr) << " ";
    o.require(std::abs(v_restr - 1.0) <= 1e-6, "V_restr != 1");
    o.require(v_full.back() <= 0.5, "V_full = " + fmt(v_full.back()) + " > 0.5");
  });

  criterion(4, "relaxed dual limit equals restricted primal (n = 48)", 30.0, [](Outcome& o) {
    const RotationInstance r = RotationInstance::auto_golden(48);
    const CostMatrix c = build_ex33_cost(r, 47);
    const TransportPlan ref = ex33_reference(r, 47);
    const std::vector<double> grid{1e-1, 1e-2, 1e-3, 1e-4};
    const EpsilonSweep s = estimate_relaxed_dual_limit(c, r.marginal(), r.marginal(), ref, grid);
    const double restricted = solve_restricted_primal(c, ref).primal_value.value();
    for (std::size_t k = 0; k < grid.size(); ++k) o.detail << "D(" << grid[k] << ")=" << fmt(s.values[k]) << " ";
    o.detail << "limit=" << fmt(s.extrapolated_limit) << " P_restr=" << fmt(restricted) << " ";
    // Grid is decreasing, so nondecreasing in eps means values[k] <= values[k-1].
    for (std::size_t k = 1; k < grid.size(); ++k)
      o.require(s.values[k] <= s.values[k - 1] + 1e-9, "D not monotone in eps");
    o.require(std::abs(s.extrapolated_limit - restricted) <= 1e-5, "extrapolated limit differs from P_restr");
  });

  criterion(5, "ConcreteBound on AP n = 24, k = 1..5", 10.0, [](Outcome& o) {
    const RotationInstance r = RotationInstance::auto_golden(24);
    const CostMatrix c = build_ap_cost(r);
    const std::vector<double> eps{1e-2, 1e-4};
    const auto seq = dual_sequence(c, r.marginal(), r.marginal(), ap_reference(r), eps);
    const auto rows = concrete_bound_check(r, c, seq, build_h(r, 5), 5);
    std::size_t passed = 0;
    for (const BoundRow& row : rows) passed += row.pass;
    o.detail << passed << "/" << rows.size() << " rows pass ";
    o.require(rows.size() == 10 && passed == rows.size(), "bound violated");
  });

  criterion(6, "property suites on 200 random instances up to 12x12", 120.0, [](Outcome& o) {
    std::mt19937_64 rng(20240601);
    int instances = 0, weak = 0, strong = 0, eps_ok = 0, slack = 0, engines = 0, jc = 0;
    const std::vector<double> eps_grid{0.0, 0.1, 0.2, 0.3, 0.4};
    for (int t = 0; t < 200; ++t) {
      const std::size_t rows = 1 + rng() % 12, cols = 1 + rng() % 12;
      const auto inst = testing::random_instance(rng, rows, cols);
      ++instances;
      const DualityReport p = solve_primal(inst.cost, inst.mu, inst.nu);
      const DualityReport d = solve_dual(inst.cost, inst.mu, inst.nu);
      const double pv = p.primal_value.value(), dv = d.dual_value.value();
      weak += dv <= pv + 2e-9;
      strong += std::abs(pv - dv) <= 2e-7;
      std::vector<double> v;
      for (double e : eps_grid) v.push_back(solve_partial(inst.cost, inst.mu, inst.nu, e).primal_value.value());
      bool ok = true;
      for (std::size_t k = 1; k < v.size(); ++k) ok &= v[k] <= v[k - 1] + 1e-9;
      for (std::size_t k = 1; k + 1 < v.size(); ++k) ok &= v[k] <= 0.5 * (v[k - 1] + v[k + 1]) + 1e-9;
      eps_ok += ok;
      slack += check_strong_ccm(inst.cost, *p.optimal_plan, *p.optimal_potentials, 1e-7).pass;
      engines += std::abs(pv - solve_primal_dense(inst.cost, inst.mu, inst.nu).primal_value.value()) <= 1e-7;
      const TransportPlan a = testing::random_coupling(rng, inst.mu, inst.nu);
      const TransportPlan b = testing::random_coupling(rng, inst.mu, inst.nu);
      jc += std::abs(j_c(*d.optimal_potentials, a).value() - j_c(*d.optimal_potentials, b).value()) <= 1e-9;
    }
    o.detail << "instances=" << instances << " weak=" << weak << " strong=" << strong << " eps=" << eps_ok
             << " slackness=" << slack << " engines=" << engines << " j_c=" << jc << " ";
    o.require(weak == instances, "weak duality");
    o.require(strong == instances, "strong duality");
    o.require(eps_ok == instances, "P^eps monotone/convex");
    o.require(slack == instances, "complementary slackness");
    o.require(engines == instances, "engine agreement");
    o.require(jc == instances, "j_c plan independence");
  });

  criterion(7, "rotation-lab exact invariants (exhaustive n <= 48)", 10.0, [](Outcome& o) {
    long checks = 0, bad = 0, plans = 0;
    for (int n = 4; n <= 48; ++n) {
      for (int s = 1; s < n; ++s) {
        if (std::gcd(s, n) != 1) continue;
        const RotationInstance r(n, s);
        const CostMatrix c = build_ex33_cost(r, n - 1);
        for (int i = 0; i < n; ++i) {
          OrbitState st{i, 0};
          long rho = rho_k(r, i, 0);
          bad += rho != 1;
          for (int k = 0; k < n; ++k) {
            const long next = rho_k(r, i, k + 1);
            bad += next - rho != g_value(r, r.step(i, k));
            bad += st.level != rho - 1;
            bad += (c.at(i, r.step(i, k)).value() == 0.0) != (rho <= 0);
            if (k >= 1) {
              const auto fp = first_passage(r, i, k);
              bad += (rho <= 0) && !fp;
            }
            checks += 4;
            st = skew_step(r, st);
            rho = next;
          }
          if (n % 2 == 0) bad += rho != 1;
        }
      }
      const RotationInstance r = RotationInstance::auto_golden(n);
      if (const auto plan = build_zero_cost_plan(r, n - 1)) {
        ++plans;
        const CostMatrix c = build_ex33_cost(r, n - 1);
        bad += std::abs(solve_primal(c, r.marginal(), r.marginal()).primal_value.value()) > 1e-9;
      }
    }
    o.detail << checks << " checks, " << plans << " zero-cost plans built ";
    o.require(bad == 0, std::to_string(bad) + " invariant violations");
  });

  criterion(8, "serialization determinism on 20 instances", 10.0, [](Outcome& o) {
    std::mt19937_64 rng(8);
    const std::vector<std::string> problems{"primal", "dual", "partial:0.2", "restricted", "relaxed-dual:0.01"};
    int identical = 0;
    for (int t = 0; t < 20; ++t) {
      InstanceFile inst;
      if (t % 4 == 0) {
        inst.kind = InstanceKind::Ap;
        inst.n = 8 + 2 * t;
      } else if (t % 4 == 1) {
        inst.kind = InstanceKind::Ex33;
        inst.n = 10 + t;
      } else {
        const auto r = testing::random_instance(rng, 2 + t % 6, 2 + t % 5);
        inst.kind = InstanceKind::Explicit;
        inst.rows = r.cost.rows();
        inst.cols = r.cost.cols();
        for (std::size_t i = 0; i < inst.rows; ++i)
          for (std::size_t j = 0; j < inst.cols; ++j) inst.cost.push_back(r.cost.at(i, j));
        inst.mu.assign(r.mu.weights().begin(), r.mu.weights().end());
        inst.nu.assign(r.nu.weights().begin(), r.nu.weights().end());
      }
      const ProblemSpec spec = parse_problem(problems[t % problems.size()]);
      const std::string first = serialize_result(make_result(inst, spec, run_problem(materialize(inst), spec, {})));
      const ResultFile parsed = parse_result(first);
      const std::string second = serialize_result(
          make_result(parsed.instance, parsed.problem, run_problem(materialize(parsed.instance), parsed.problem, {})));
      identical += first == second;
    }
    o.detail << identical << "/20 byte-identical ";
    o.require(identical == 20, "result files differ");
  });

  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
