#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "mkdual/diagnostics.hpp"
#include "mkdual/io.hpp"
#include "mkdual/rotation.hpp"
#include "mkdual/solvers.hpp"

namespace py = pybind11;
using namespace mkdual;

namespace {

using Matrix = std::vector<std::vector<double>>;

void shape_of(const Matrix& m, std::size_t& rows, std::size_t& cols) {
  rows = m.size();
  cols = rows ? m[0].size() : 0;
  for (const auto& r : m)
    if (r.size() != cols) throw std::invalid_argument("ragged matrix");
}

CostMatrix to_cost(const Matrix& m) {
  std::size_t rows = 0, cols = 0;
  shape_of(m, rows, cols);
  std::vector<Extended> e;
  e.reserve(rows * cols);
  for (const auto& r : m)
    for (double v : r) e.push_back(std::isinf(v) && v > 0 ? Extended::infinity() : Extended(v));
  return CostMatrix(rows, cols, std::move(e));
}

TransportPlan to_plan(const Matrix& m) {
  std::size_t rows = 0, cols = 0;
  shape_of(m, rows, cols);
  std::vector<double> mass;
  for (const auto& r : m) mass.insert(mass.end(), r.begin(), r.end());
  return TransportPlan::from_mass(rows, cols, std::move(mass));
}

Matrix from_plan(const TransportPlan& p) {
  Matrix m(p.rows(), std::vector<double>(p.cols()));
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = 0; j < p.cols(); ++j) m[i][j] = p(i, j);
  return m;
}

Matrix from_cost(const CostMatrix& c) {
  Matrix m(c.rows(), std::vector<double>(c.cols()));
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) m[i][j] = c.at(i, j).to_double();
  return m;
}

std::vector<double> to_doubles(std::span<const Extended> v) {
  std::vector<double> out;
  for (const Extended& e : v) out.push_back(e.to_double());
  return out;
}

SolverConfig config(double tol) {
  SolverConfig cfg;
  cfg.feasibility_tol = tol;
  cfg.optimality_tol = tol;
  return cfg;
}

py::dict report_dict(const DualityReport& r) {
  py::dict d;
  d["primal_value"] = r.primal_value.to_double();
  d["dual_value"] = r.dual_value.to_double();
  d["gap"] = r.gap();
  d["plan"] = r.optimal_plan ? py::cast(from_plan(*r.optimal_plan)) : py::none();
  if (r.optimal_potentials) {
    d["phi"] = to_doubles(r.optimal_potentials->phi());
    d["psi"] = to_doubles(r.optimal_potentials->psi());
  } else {
    d["phi"] = py::none();
    d["psi"] = py::none();
  }
  d["iterations"] = r.stats.iterations;
  return d;
}

RotationInstance rotation(int n, std::optional<int> shift) {
  return shift ? RotationInstance(n, *shift) : RotationInstance::auto_golden(n);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Finite optimal transport duality solvers";

  py::register_exception<SolveError>(m, "SolveError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  m.def("solve_primal", [](const Matrix& c, const std::vector<double>& mu, const std::vector<double>& nu, double tol) {
    return report_dict(solve_primal(to_cost(c), Marginal(mu), Marginal(nu), config(tol)));
  }, py::arg("cost"), py::arg("mu"), py::arg("nu"), py::arg("tol") = 1e-9);

  m.def("solve_dual", [](const Matrix& c, const std::vector<double>& mu, const std::vector<double>& nu, double tol) {
    return report_dict(solve_dual(to_cost(c), Marginal(mu), Marginal(nu), config(tol)));
  }, py::arg("cost"), py::arg("mu"), py::arg("nu"), py::arg("tol") = 1e-9);

  m.def("solve_partial", [](const Matrix& c, const std::vector<double>& mu, const std::vector<double>& nu, double eps,
                            double tol) {
    return report_dict(solve_partial(to_cost(c), Marginal(mu), Marginal(nu), eps, config(tol)));
  }, py::arg("cost"), py::arg("mu"), py::arg("nu"), py::arg("eps"), py::arg("tol") = 1e-9);

  m.def("solve_restricted_primal", [](const Matrix& c, const Matrix& pi0, double tol) {
    return report_dict(solve_restricted_primal(to_cost(c), to_plan(pi0), config(tol)));
  }, py::arg("cost"), py::arg("pi0"), py::arg("tol") = 1e-9);

  m.def("solve_relaxed_dual", [](const Matrix& c, const std::vector<double>& mu, const std::vector<double>& nu,
                                 const Matrix& pi0, double eps, double tol) {
    return report_dict(solve_relaxed_dual(to_cost(c), Marginal(mu), Marginal(nu), to_plan(pi0), eps, config(tol)));
  }, py::arg("cost"), py::arg("mu"), py::arg("nu"), py::arg("pi0"), py::arg("eps"), py::arg("tol") = 1e-9);

  m.def("estimate_p_rel", [](const Matrix& c, const std::vector<double>& mu, const std::vector<double>& nu,
                             const std::vector<double>& grid) {
    const EpsilonSweep s = estimate_p_rel(to_cost(c), Marginal(mu), Marginal(nu), grid);
    py::dict d;
    d["epsilons"] = s.epsilons;
    d["values"] = s.values;
    d["extrapolated_limit"] = s.extrapolated_limit;
    d["monotone"] = s.monotone;
    return d;
  }, py::arg("cost"), py::arg("mu"), py::arg("nu"), py::arg("grid"));

  m.def("check_strong_ccm", [](const Matrix& c, const Matrix& plan, const std::vector<double>& phi,
                               const std::vector<double>& psi, double tol) {
    const auto r = check_strong_ccm(to_cost(c), to_plan(plan), PotentialPair::finite(phi, psi), tol);
    return py::make_tuple(r.pass, r.witness ? py::cast(*r.witness) : py::none());
  }, py::arg("cost"), py::arg("plan"), py::arg("phi"), py::arg("psi"), py::arg("tol") = 1e-7);

  m.def("ap_cost", [](int n, std::optional<int> shift) { return from_cost(build_ap_cost(rotation(n, shift))); },
        py::arg("n"), py::arg("shift") = py::none());
  m.def("ex33_cost", [](int n, std::optional<int> k_max, std::optional<int> shift) {
    return from_cost(build_ex33_cost(rotation(n, shift), k_max.value_or(n - 1)));
  }, py::arg("n"), py::arg("k_max") = py::none(), py::arg("shift") = py::none());
  m.def("golden_shift", [](int n) { return RotationInstance::auto_golden(n).shift(); }, py::arg("n"));
  m.def("rho_k", [](int n, int shift, int i, long k) { return rho_k(RotationInstance(n, shift), i, k); },
        py::arg("n"), py::arg("shift"), py::arg("i"), py::arg("k"));

  m.def("solve_instance", [](const std::string& text, const std::string& problem, double tol) {
    const InstanceFile inst = parse_instance(text);
    const ProblemSpec spec = parse_problem(problem);
    return serialize_result(make_result(inst, spec, run_problem(materialize(inst), spec, config(tol))));
  }, py::arg("instance_json"), py::arg("problem") = "primal", py::arg("tol") = 1e-9);
}
