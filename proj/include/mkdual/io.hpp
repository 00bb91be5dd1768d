#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mkdual/rotation.hpp"
#include "mkdual/solvers.hpp"
#include "mkdual/transport.hpp"

namespace mkdual {

/// Malformed or invalid instance/result text. For JSON syntax errors the
/// message carries "line L, column C".
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InstanceKind { Explicit, Ap, Ex33 };

struct InstanceFile {
  int schema_version = 1;
  InstanceKind kind = InstanceKind::Explicit;

  // kind == Explicit
  std::size_t rows = 0, cols = 0;
  std::vector<Extended> cost;  // row-major
  std::vector<double> mu, nu;
  std::vector<std::string> mu_labels, nu_labels;
  std::optional<std::vector<double>> reference_plan;  // row-major

  // kind == Ap / Ex33
  int n = 0;
  std::optional<int> shift;  // absent: auto-golden
  std::optional<int> k_max;
  std::optional<int> reference_k_max;

  std::optional<std::uint64_t> seed;
};

/// Instance turned into solver inputs.
struct MaterializedInstance {
  CostMatrix cost;
  Marginal mu;
  Marginal nu;
  /// Reference plan for restricted problems, when the instance defines one.
  std::optional<TransportPlan> reference;
  std::optional<RotationInstance> rotation;
  int k_max = 0;
};

InstanceFile parse_instance(const std::string& text);
std::string serialize_instance(const InstanceFile& inst);
MaterializedInstance materialize(const InstanceFile& inst);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

enum class ProblemKind { Primal, Dual, Partial, Restricted, RelaxedDual };

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Primal;
  double eps = 0.0;  // Partial, RelaxedDual
};

/// "primal", "dual", "partial:0.25", "restricted", "relaxed-dual:1e-3".
ProblemSpec parse_problem(const std::string& text);
std::string to_string(const ProblemSpec& p);

struct ResultFile {
  int schema_version = 1;
  InstanceFile instance;
  ProblemSpec problem;
  std::string status;   // "optimal" or a SolveStatus name
  std::string message;  // empty when optimal
  Extended primal_value;
  Extended dual_value;
  double gap = 0.0;
  std::optional<PlanKind> plan_kind;
  std::vector<double> plan;  // row-major, empty when absent
  std::vector<Extended> phi, psi;
  long iterations = 0, pivots = 0, degenerate_pivots = 0;
};

ResultFile make_result(const InstanceFile& inst, const ProblemSpec& problem, const DualityReport& report);

/// JSON with every float printed to 17 significant digits; deterministic
/// (no timestamps, fixed key order).
std::string serialize_result(const ResultFile& r);
ResultFile parse_result(const std::string& text);

/// Runs `problem` on the instance; throws SolveError on non-optimal termination.
DualityReport run_problem(const MaterializedInstance& mi, const ProblemSpec& problem, const SolverConfig& cfg);

/// %.17g rendering used by CSV tables.
std::string format_double(double v);

}  // namespace mkdual
