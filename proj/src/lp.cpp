#include "mkdual/lp.hpp"

namespace mkdual {

void SolverConfig::validate() const {
  if (!(feasibility_tol > 0.0) || !(optimality_tol > 0.0))
    throw std::invalid_argument("SolverConfig: tolerances must be positive");
  if (max_iterations <= 0) throw std::invalid_argument("SolverConfig: max_iterations must be positive");
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration-limit";
    case SolveStatus::Internal: return "internal-error";
  }
  return "unknown";
}

}  // namespace mkdual
