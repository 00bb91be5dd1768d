#include "mkdual/commands.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <ostream>
#include <random>
#include <sstream>

#include "mkdual/diagnostics.hpp"
#include "mkdual/io.hpp"
#include "mkdual/rotation.hpp"
#include "mkdual/solvers.hpp"

namespace mkdual {

namespace {

const std::vector<double> kDefaultEpsPrimal{1e-1, 1e-2, 1e-3};
const std::vector<double> kDefaultEpsDual{1e-1, 1e-2, 1e-3, 1e-4};
const std::vector<double> kDefaultBoundEps{1e-2, 1e-4};
const std::vector<double> kDefaultDelta{0.5, 0.25, 0.1, 0.05, 0.02, 0.01};
const std::vector<double> kDefaultN{24, 48, 96, 192};

int exit_code_for(SolveStatus s) {
  switch (s) {
    case SolveStatus::Infeasible: return kExitInfeasible;
    case SolveStatus::IterationLimit: return kExitIterationLimit;
    default: return kExitUsage;
  }
}

void emit(const CommandContext& ctx, const std::string& text) {
  if (ctx.out_path.empty()) {
    *ctx.out << text;
  } else {
    write_text_file(ctx.out_path, text);
  }
}

// Runs `body`, translating exceptions into exit codes and a message on err.
template <typename Body>
int guarded(const CommandContext& ctx, Body body) {
  try {
    return body();
  } catch (const SolveError& e) {
    *ctx.err << "error: " << to_string(e.status()) << ": " << e.what() << '\n';
    return exit_code_for(e.status());
  } catch (const std::exception& e) {
    *ctx.err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

struct Loaded {
  InstanceFile file;
  MaterializedInstance mi;
};

Loaded load(const std::string& path) {
  InstanceFile file = parse_instance(read_text_file(path));
  MaterializedInstance mi = materialize(file);
  return {std::move(file), std::move(mi)};
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string row;
  for (const auto& c : cells) {
    if (!row.empty()) row += ',';
    row += c;
  }
  return row + '\n';
}

std::string num(double v) { return format_double(v); }
std::string num(long v) { return std::to_string(v); }

const RotationInstance& require_rotation(const MaterializedInstance& mi, const char* what) {
  if (!mi.rotation) throw std::invalid_argument(std::string(what) + " needs an ap or ex33 instance");
  return *mi.rotation;
}

std::string sweep_table(const EpsilonSweep& sw) {
  std::string out = "parameter,value,iterations,wall_ms\n";
  for (std::size_t k = 0; k < sw.epsilons.size(); ++k)
    out += csv_row({num(sw.epsilons[k]), num(sw.values[k]), num(sw.stats[k].iterations), num(sw.stats[k].wall_ms)});
  out += csv_row({"0", num(sw.extrapolated_limit), "0", "0"});
  return out;
}

std::string n_scaling_table(const InstanceFile& base, const std::vector<double>& grid, const SolverConfig& cfg) {
  if (base.kind == InstanceKind::Explicit) throw std::invalid_argument("n-scaling needs an ap or ex33 instance");
  std::vector<int> ns;
  for (double v : grid) {
    if (v != static_cast<int>(v) || v < 4) throw std::invalid_argument("n-scaling grid must hold integers >= 4");
    if (!ns.empty() && v <= ns.back()) throw std::invalid_argument("n-scaling grid must be increasing");
    ns.push_back(static_cast<int>(v));
  }
  std::vector<std::future<DualityReport>> jobs;
  for (int n : ns) {
    InstanceFile inst = base;
    inst.n = n;
    inst.shift.reset();
    inst.k_max.reset();
    jobs.push_back(std::async(std::launch::async, [inst, &cfg] {
      const MaterializedInstance mi = materialize(inst);
      return solve_primal(mi.cost, mi.mu, mi.nu, cfg);
    }));
  }
  std::string out = "parameter,value,iterations,wall_ms\n";
  for (std::size_t k = 0; k < ns.size(); ++k) {
    const DualityReport r = jobs[k].get();
    out += csv_row({std::to_string(ns[k]), num(r.primal_value.value()), num(r.stats.iterations), num(r.stats.wall_ms)});
  }
  return out;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw std::invalid_argument("bad grid value '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty grid");
  return out;
}

int cmd_solve(const CommandContext& ctx, const std::string& instance_path, const std::string& problem_text) {
  return guarded(ctx, [&] {
    ctx.cfg.validate();
    const ProblemSpec problem = parse_problem(problem_text);
    const Loaded in = load(instance_path);
    ResultFile result;
    int code = kExitOk;
    try {
      const DualityReport report = run_problem(in.mi, problem, ctx.cfg);
      result = make_result(in.file, problem, report);
      *ctx.out << "problem: " << to_string(problem) << '\n'
               << "primal value: " << report.primal_value.str() << '\n'
               << "dual value: " << report.dual_value.str() << '\n'
               << "gap: " << format_double(report.gap()) << '\n'
               << "iterations: " << report.stats.iterations << '\n';
    } catch (const SolveError& e) {
      result.instance = in.file;
      result.problem = problem;
      result.status = to_string(e.status());
      result.message = e.what();
      *ctx.err << "error: " << result.status << ": " << e.what() << '\n';
      code = exit_code_for(e.status());
    }
    if (!ctx.out_path.empty()) write_text_file(ctx.out_path, serialize_result(result));
    return code;
  });
}

int cmd_sweep(const CommandContext& ctx, const std::string& instance_path, const std::string& sweep,
              const std::vector<double>& grid) {
  return guarded(ctx, [&] {
    ctx.cfg.validate();
    const Loaded in = load(instance_path);
    std::string table;
    if (sweep == "epsilon-primal") {
      const auto& g = grid.empty() ? kDefaultEpsPrimal : grid;
      table = sweep_table(estimate_p_rel(in.mi.cost, in.mi.mu, in.mi.nu, g, ctx.cfg));
    } else if (sweep == "epsilon-dual") {
      if (!in.mi.reference) throw std::invalid_argument("instance defines no finite-cost reference plan");
      const auto& g = grid.empty() ? kDefaultEpsDual : grid;
      table = sweep_table(estimate_relaxed_dual_limit(in.mi.cost, in.mi.mu, in.mi.nu, *in.mi.reference, g, ctx.cfg));
    } else if (sweep == "n-scaling") {
      table = n_scaling_table(in.file, grid.empty() ? kDefaultN : grid, ctx.cfg);
    } else {
      throw std::invalid_argument("unknown sweep '" + sweep + "'");
    }
    emit(ctx, table);
    return kExitOk;
  });
}

int cmd_diagnose(const CommandContext& ctx, const std::string& instance_path, const std::string& diag,
                 const DiagnoseParams& params) {
  return guarded(ctx, [&] {
    ctx.cfg.validate();
    const Loaded in = load(instance_path);
    const MaterializedInstance& mi = in.mi;
    std::string table;
    if (diag == "ccm") {
      const DualityReport r = solve_primal(mi.cost, mi.mu, mi.nu, ctx.cfg);
      const TransportPlan& plan = *r.optimal_plan;
      const PotentialPair& pp = *r.optimal_potentials;
      const auto strong = check_strong_ccm(mi.cost, plan, pp, params.tol);
      const std::vector<TransportPlan> family{plan};
      const auto ae = check_ccm_ae(mi.cost, plan, pp, family, params.tol);
      const auto cert = attainment_certificate(mi.cost, plan, pp, params.tol);
      auto witness = [](const MonotonicityCheck& m) {
        return m.witness ? std::to_string(m.witness->first) + ":" + std::to_string(m.witness->second) : std::string();
      };
      table = "check,pass,value,witness\n";
      table += csv_row({"strong_ccm", strong.pass ? "1" : "0", "", witness(strong)});
      table += csv_row({"ccm_ae", ae.pass ? "1" : "0", "", witness(ae)});
      table += csv_row({"attainment", cert.certified ? "1" : "0", num(cert.gap), ""});
    } else if (diag == "bound") {
      const RotationInstance& rot = require_rotation(mi, "bound");
      if (in.file.kind != InstanceKind::Ap) throw std::invalid_argument("bound needs an ap instance");
      const int k_max = std::min(params.k_max.value_or(5), rot.n() - 1);
      const auto& eps = params.eps_grid.empty() ? kDefaultBoundEps : params.eps_grid;
      const auto seq = dual_sequence(mi.cost, mi.mu, mi.nu, *mi.reference, eps, ctx.cfg);
      const CellFunction h = build_h(rot, k_max);
      table = "eps,k,lhs,rhs,pass\n";
      for (const BoundRow& row : concrete_bound_check(rot, mi.cost, seq, h, k_max))
        table += csv_row({num(eps[row.sequence_index]), std::to_string(row.k), num(row.lhs), num(row.rhs),
                          row.pass ? "1" : "0"});
    } else if (diag == "singular") {
      if (!mi.reference) throw std::invalid_argument("instance defines no finite-cost reference plan");
      const auto& eps = params.eps_grid.empty() ? kDefaultEpsDual : params.eps_grid;
      const auto& delta = params.delta_grid.empty() ? kDefaultDelta : params.delta_grid;
      const auto seq = dual_sequence(mi.cost, mi.mu, mi.nu, *mi.reference, eps, ctx.cfg);
      const CellFunction h = mi.rotation ? build_h(*mi.rotation, std::max(mi.k_max, 1)) : as_cell_function(mi.cost);
      const SequenceDiagnostics d = singular_mass_estimate(*mi.reference, seq, h, delta);
      table = "eps,delta,profile,l1_to_limit,positive_part\n";
      for (std::size_t p = 0; p < eps.size(); ++p)
        for (std::size_t k = 0; k < delta.size(); ++k)
          table += csv_row({num(eps[p]), num(delta[k]), num(d.profile[p][k]), num(d.l1_distances_to_limit[p]),
                            num(d.positive_part_norms[p])});
    } else {
      throw std::invalid_argument("unknown diagnostic '" + diag + "'");
    }
    emit(ctx, table);
    return kExitOk;
  });
}

int cmd_gen(const CommandContext& ctx, const GenParams& params) {
  return guarded(ctx, [&] {
    InstanceFile inst;
    if (params.kind == "ap" || params.kind == "ex33") {
      inst.kind = params.kind == "ap" ? InstanceKind::Ap : InstanceKind::Ex33;
      inst.n = params.n;
      inst.shift = params.shift;
      inst.k_max = params.k_max;
    } else if (params.kind == "explicit") {
      if (params.rows == 0 || params.cols == 0 || params.rows > kMaxDimension || params.cols > kMaxDimension)
        throw std::invalid_argument("explicit instance dimensions out of range");
      std::mt19937_64 rng(params.seed);
      std::uniform_int_distribution<int> cost(0, 9);
      std::uniform_real_distribution<double> weight(0.5, 1.5);
      auto marginal = [&](std::size_t n) {
        std::vector<double> w(n);
        for (double& x : w) x = weight(rng);
        double total = 0.0;
        for (double x : w) total += x;
        for (double& x : w) x /= total;
        return w;
      };
      inst.kind = InstanceKind::Explicit;
      inst.rows = params.rows;
      inst.cols = params.cols;
      for (std::size_t k = 0; k < params.rows * params.cols; ++k) inst.cost.emplace_back(static_cast<double>(cost(rng)));
      inst.mu = marginal(params.rows);
      inst.nu = marginal(params.cols);
      inst.seed = params.seed;
    } else {
      throw std::invalid_argument("unknown instance kind '" + params.kind + "'");
    }
    const std::string text = serialize_instance(inst);
    (void)parse_instance(text);
    emit(ctx, text);
    return kExitOk;
  });
}

}  // namespace mkdual
