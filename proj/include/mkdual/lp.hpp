#pragma once

#include <stdexcept>
#include <string>

namespace mkdual {

enum class PivotRule { DantzigWithBlandFallback };

struct SolverConfig {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  long max_iterations = 1'000'000;
  PivotRule pivot_rule = PivotRule::DantzigWithBlandFallback;

  /// Throws std::invalid_argument on nonpositive tolerances or limits.
  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit, Internal };

const char* to_string(SolveStatus s);

/// Raised by the solvers for every non-optimal termination.
class SolveError : public std::runtime_error {
 public:
  SolveError(SolveStatus status, const std::string& what)
      : std::runtime_error(what), status_(status) {}
  SolveStatus status() const { return status_; }

 private:
  SolveStatus status_;
};

}  // namespace mkdual
