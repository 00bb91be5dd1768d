#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mkdual/lp.hpp"

namespace mkdual {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitInfeasible = 2, kExitIterationLimit = 3 };

struct CommandContext {
  SolverConfig cfg;
  std::string out_path;  // empty: standard output
  std::ostream* out;
  std::ostream* err;
};

int cmd_solve(const CommandContext& ctx, const std::string& instance_path, const std::string& problem);

/// sweep: "epsilon-primal", "epsilon-dual" or "n-scaling". An empty grid selects the default.
int cmd_sweep(const CommandContext& ctx, const std::string& instance_path, const std::string& sweep,
              const std::vector<double>& grid);

struct DiagnoseParams {
  std::vector<double> eps_grid;    // empty: default
  std::vector<double> delta_grid;  // empty: default
  std::optional<int> k_max;
  double tol = 1e-7;
};

/// diag: "ccm", "bound" or "singular".
int cmd_diagnose(const CommandContext& ctx, const std::string& instance_path, const std::string& diag,
                 const DiagnoseParams& params);

struct GenParams {
  std::string kind = "ap";  // ap, ex33, explicit
  int n = 8;
  std::optional<int> shift;
  std::optional<int> k_max;
  std::uint64_t seed = 1;
  std::size_t rows = 4, cols = 4;
};

int cmd_gen(const CommandContext& ctx, const GenParams& params);

/// Comma separated list of reals, e.g. "0.1,0.01,1e-3".
std::vector<double> parse_grid(const std::string& text);

}  // namespace mkdual
