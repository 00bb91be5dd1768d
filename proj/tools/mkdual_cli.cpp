// mkdual: solve, sweep, diagnose and generate finite transport instances.
#include <iostream>

#include "CLI11.hpp"
#include "mkdual/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Finite Monge-Kantorovich duality laboratory"};
  app.require_subcommand(1);

  mkdual::SolverConfig cfg;
  std::string out_path;
  double tol = cfg.optimality_tol;
  long max_iter = cfg.max_iterations;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--tol", tol, "Solver feasibility and optimality tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", max_iter, "Solver iteration limit")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_path, "Output file (default: standard output)");
  };

  std::string instance, problem = "primal", sweep, diag, grid, delta;
  std::optional<int> k_max;

  auto* solve = app.add_subcommand("solve", "Solve one problem and write a JSON result");
  solve->add_option("instance", instance, "Instance file")->required();
  solve->add_option("--problem", problem,
                    "primal | dual | partial:EPS | restricted | relaxed-dual:EPS")->capture_default_str();
  common(solve);

  auto* sw = app.add_subcommand("sweep", "Parameter sweep, CSV output");
  sw->add_option("instance", instance, "Instance file")->required();
  sw->add_option("--sweep", sweep, "epsilon-primal | epsilon-dual | n-scaling")->required();
  sw->add_option("--grid", grid, "Comma separated grid values");
  common(sw);

  double diag_tol = 1e-7;
  auto* dg = app.add_subcommand("diagnose", "Structural diagnostics, CSV output");
  dg->add_option("instance", instance, "Instance file")->required();
  dg->add_option("--diag", diag, "ccm | bound | singular")->required();
  dg->add_option("--grid", grid, "Comma separated epsilon values");
  dg->add_option("--delta", delta, "Comma separated decreasing delta values (singular)");
  dg->add_option("--k-max", k_max, "Largest k for the bound table");
  dg->add_option("--check-tol", diag_tol, "Tolerance of the monotonicity checks")->capture_default_str();
  common(dg);

  mkdual::GenParams gen_params;
  std::optional<int> shift, gen_k_max;
  auto* gen = app.add_subcommand("gen", "Write a template instance file");
  gen->add_option("--kind", gen_params.kind, "ap | ex33 | explicit")->capture_default_str();
  gen->add_option("--n", gen_params.n, "Grid size (ap, ex33)")->capture_default_str();
  gen->add_option("--shift", shift, "Rotation shift (default: auto-golden)");
  gen->add_option("--k-max", gen_k_max, "Largest graph index (ex33)");
  gen->add_option("--seed", gen_params.seed, "Random seed (explicit)")->capture_default_str();
  gen->add_option("--rows", gen_params.rows, "Rows (explicit)")->capture_default_str();
  gen->add_option("--cols", gen_params.cols, "Columns (explicit)")->capture_default_str();
  gen->add_option("--out", out_path, "Output file (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mkdual::kExitUsage;
  }

  cfg.feasibility_tol = tol;
  cfg.optimality_tol = tol;
  cfg.max_iterations = max_iter;
  const mkdual::CommandContext ctx{cfg, out_path, &std::cout, &std::cerr};

  try {
    if (*solve) return mkdual::cmd_solve(ctx, instance, problem);
    if (*sw) return mkdual::cmd_sweep(ctx, instance, sweep, grid.empty() ? std::vector<double>{} : mkdual::parse_grid(grid));
    if (*dg) {
      mkdual::DiagnoseParams p;
      if (!grid.empty()) p.eps_grid = mkdual::parse_grid(grid);
      if (!delta.empty()) p.delta_grid = mkdual::parse_grid(delta);
      p.k_max = k_max;
      p.tol = diag_tol;
      return mkdual::cmd_diagnose(ctx, instance, diag, p);
    }
    gen_params.shift = shift;
    gen_params.k_max = gen_k_max;
    return mkdual::cmd_gen(ctx, gen_params);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return mkdual::kExitUsage;
  }
}
