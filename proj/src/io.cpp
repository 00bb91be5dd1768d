#include "mkdual/io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mkdual {

using json = nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;

// ---- writer ---------------------------------------------------------------

std::string format_float17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

void dump(const json& j, std::string& out) {
  switch (j.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += json(key).dump();
        out += ':';
        dump(value, out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& value : j) {
        if (!first) out += ',';
        first = false;
        dump(value, out);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float:
      out += format_float17(j.get<double>());
      break;
    default:
      out += j.dump();
  }
}

std::string to_text(const json& j) {
  std::string out;
  dump(j, out);
  out += '\n';
  return out;
}

json extended_to_json(const Extended& e) {
  if (e.is_pos_inf()) return "inf";
  if (e.is_neg_inf()) return "-inf";
  return e.value();
}

// ---- reader ---------------------------------------------------------------

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t k = 0; k < end; ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("JSON syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                     ": " + e.what());
  }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!ok.count(key)) throw ParseError(where + ": unknown field '" + key + "'");
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  return obj.at(key);
}

double as_double(const json& j, const std::string& what) {
  if (!j.is_number()) throw ParseError(what + ": expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw ParseError(what + ": expected an integer");
  return j.get<int>();
}

Extended as_extended(const json& j, const std::string& what) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return Extended::infinity();
    if (s == "-inf") return Extended::neg_infinity();
    throw ParseError(what + ": unknown string value '" + s + "'");
  }
  return Extended(as_double(j, what));
}

std::vector<double> as_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + ": expected an array");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(as_double(v, what));
  return out;
}

std::vector<std::string> as_strings(const json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + ": expected an array");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw ParseError(what + ": expected strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

// Matrix as array of rows; returns row-major values and the shape.
template <typename Convert>
auto as_matrix(const json& j, const std::string& what, std::size_t& rows, std::size_t& cols, Convert conv) {
  if (!j.is_array() || j.empty()) throw ParseError(what + ": expected a nonempty array of rows");
  rows = j.size();
  cols = 0;
  std::vector<decltype(conv(j[0][0], what))> out;
  for (const auto& row : j) {
    if (!row.is_array() || row.empty()) throw ParseError(what + ": rows must be nonempty arrays");
    if (cols == 0) cols = row.size();
    if (row.size() != cols) throw ParseError(what + ": ragged matrix");
    for (const auto& v : row) out.push_back(conv(v, what));
  }
  return out;
}

template <typename T, typename Convert>
json matrix_to_json(const std::vector<T>& values, std::size_t rows, std::size_t cols, Convert conv) {
  json m = json::array();
  for (std::size_t i = 0; i < rows; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < cols; ++j) row.push_back(conv(values[i * cols + j]));
    m.push_back(std::move(row));
  }
  return m;
}

const char* kind_name(InstanceKind k) {
  switch (k) {
    case InstanceKind::Ap: return "ap";
    case InstanceKind::Ex33: return "ex33";
    default: return "explicit";
  }
}

json instance_to_json(const InstanceFile& inst) {
  json j;
  j["schema_version"] = inst.schema_version;
  j["kind"] = kind_name(inst.kind);
  if (inst.kind == InstanceKind::Explicit) {
    j["cost"] = matrix_to_json(inst.cost, inst.rows, inst.cols, extended_to_json);
    j["mu"] = inst.mu;
    j["nu"] = inst.nu;
    if (!inst.mu_labels.empty()) j["mu_labels"] = inst.mu_labels;
    if (!inst.nu_labels.empty()) j["nu_labels"] = inst.nu_labels;
    if (inst.reference_plan)
      j["reference_plan"] = matrix_to_json(*inst.reference_plan, inst.rows, inst.cols, [](double v) { return json(v); });
  } else {
    j["n"] = inst.n;
    j["shift"] = inst.shift ? json(*inst.shift) : json("auto-golden");
    if (inst.k_max) j["k_max"] = *inst.k_max;
    if (inst.reference_k_max) j["reference_k_max"] = *inst.reference_k_max;
  }
  if (inst.seed) j["seed"] = *inst.seed;
  return j;
}

InstanceFile instance_from_json(const json& j) {
  const std::string where = "instance";
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  InstanceFile inst;
  inst.schema_version = as_int(require(j, "schema_version", where), "schema_version");
  if (inst.schema_version != kSchemaVersion)
    throw ParseError("instance: unsupported schema_version " + std::to_string(inst.schema_version));
  const json& kind = require(j, "kind", where);
  if (!kind.is_string()) throw ParseError("instance: kind must be a string");
  const auto k = kind.get<std::string>();
  if (k == "explicit") {
    inst.kind = InstanceKind::Explicit;
    reject_unknown(j, {"schema_version", "kind", "cost", "mu", "nu", "mu_labels", "nu_labels", "reference_plan", "seed"},
                   where);
    inst.cost = as_matrix(require(j, "cost", where), "cost", inst.rows, inst.cols, as_extended);
    inst.mu = as_vector(require(j, "mu", where), "mu");
    inst.nu = as_vector(require(j, "nu", where), "nu");
    if (j.contains("mu_labels")) inst.mu_labels = as_strings(j["mu_labels"], "mu_labels");
    if (j.contains("nu_labels")) inst.nu_labels = as_strings(j["nu_labels"], "nu_labels");
    if (j.contains("reference_plan")) {
      std::size_t r = 0, c = 0;
      inst.reference_plan = as_matrix(j["reference_plan"], "reference_plan", r, c, as_double);
      if (r != inst.rows || c != inst.cols) throw ParseError("reference_plan: shape differs from cost");
    }
  } else if (k == "ap" || k == "ex33") {
    inst.kind = k == "ap" ? InstanceKind::Ap : InstanceKind::Ex33;
    reject_unknown(j, {"schema_version", "kind", "n", "shift", "k_max", "reference_k_max", "seed"}, where);
    inst.n = as_int(require(j, "n", where), "n");
    if (j.contains("shift")) {
      const json& s = j["shift"];
      if (s.is_string()) {
        if (s.get<std::string>() != "auto-golden") throw ParseError("shift: expected an integer or \"auto-golden\"");
      } else {
        inst.shift = as_int(s, "shift");
      }
    }
    if (j.contains("k_max")) inst.k_max = as_int(j["k_max"], "k_max");
    if (j.contains("reference_k_max")) inst.reference_k_max = as_int(j["reference_k_max"], "reference_k_max");
  } else {
    throw ParseError("instance: unknown kind '" + k + "'");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ParseError("seed: expected a nonnegative integer");
    inst.seed = j["seed"].get<std::uint64_t>();
  }
  return inst;
}

const char* plan_kind_name(PlanKind k) { return k == PlanKind::ExactCoupling ? "exact-coupling" : "sub-coupling"; }

}  // namespace

// ---- instances -------------------------------------------------------------

InstanceFile parse_instance(const std::string& text) {
  InstanceFile inst = instance_from_json(parse_json(text));
  try {
    (void)materialize(inst);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("instance: ") + e.what());
  }
  return inst;
}

std::string serialize_instance(const InstanceFile& inst) { return to_text(instance_to_json(inst)); }

MaterializedInstance materialize(const InstanceFile& inst) {
  if (inst.kind == InstanceKind::Explicit) {
    Marginal mu(inst.mu, inst.mu_labels);
    Marginal nu(inst.nu, inst.nu_labels);
    CostMatrix cost(inst.rows, inst.cols, inst.cost);
    if (mu.size() != inst.rows || nu.size() != inst.cols)
      throw std::invalid_argument("marginal lengths differ from the cost shape");
    std::optional<TransportPlan> reference;
    if (inst.reference_plan) {
      reference = TransportPlan(inst.rows, inst.cols, *inst.reference_plan, PlanKind::ExactCoupling, mu, nu);
    } else {
      // Product coupling, when it avoids forbidden cells.
      std::vector<double> mass(inst.rows * inst.cols);
      for (std::size_t i = 0; i < inst.rows; ++i)
        for (std::size_t j = 0; j < inst.cols; ++j) mass[i * inst.cols + j] = mu[i] * nu[j];
      TransportPlan product(inst.rows, inst.cols, std::move(mass), PlanKind::ExactCoupling, mu, nu);
      if (transport_cost(cost, product).is_finite()) reference = std::move(product);
    }
    return {std::move(cost), std::move(mu), std::move(nu), std::move(reference), std::nullopt, 0};
  }
  const RotationInstance rot = inst.shift ? RotationInstance(inst.n, *inst.shift) : RotationInstance::auto_golden(inst.n);
  if (inst.kind == InstanceKind::Ap) {
    if (inst.k_max && *inst.k_max != 1) throw std::invalid_argument("ap instances have k_max = 1");
    CostMatrix cost = build_ap_cost(rot);
    const std::vector<TransportPlan> plans{gamma_plan(rot, 0), gamma_plan(rot, 1)};
    const std::vector<double> half{0.5, 0.5};
    return {std::move(cost), rot.marginal(), rot.marginal(), mixture_plan(plans, half), rot, 1};
  }
  const int k_max = inst.k_max.value_or(inst.n - 1);
  CostMatrix cost = build_ex33_cost(rot, k_max);
  const int ref_k = std::min(inst.reference_k_max.value_or(4), k_max);
  if (ref_k < 0) throw std::invalid_argument("reference_k_max must be >= 0");
  const CellFunction h = build_h(rot, k_max);
  const auto weights = make_weights(rot, ref_k, h, {});
  return {std::move(cost), rot.marginal(), rot.marginal(), weighted_gamma_plan(rot, weights), rot, k_max};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

// ---- problems --------------------------------------------------------------

ProblemSpec parse_problem(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const bool has_eps = colon != std::string::npos;
  ProblemSpec p;
  if (name == "primal") p.kind = ProblemKind::Primal;
  else if (name == "dual") p.kind = ProblemKind::Dual;
  else if (name == "partial") p.kind = ProblemKind::Partial;
  else if (name == "restricted") p.kind = ProblemKind::Restricted;
  else if (name == "relaxed-dual") p.kind = ProblemKind::RelaxedDual;
  else throw std::invalid_argument("unknown problem '" + name + "'");
  const bool needs_eps = p.kind == ProblemKind::Partial || p.kind == ProblemKind::RelaxedDual;
  if (needs_eps != has_eps)
    throw std::invalid_argument(needs_eps ? "problem '" + name + "' needs ':<eps>'"
                                          : "problem '" + name + "' takes no epsilon");
  if (has_eps) {
    const std::string eps = text.substr(colon + 1);
    std::size_t used = 0;
    try {
      p.eps = std::stod(eps, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != eps.size() || !std::isfinite(p.eps))
      throw std::invalid_argument("bad epsilon '" + eps + "'");
  }
  return p;
}

std::string to_string(const ProblemSpec& p) {
  switch (p.kind) {
    case ProblemKind::Primal: return "primal";
    case ProblemKind::Dual: return "dual";
    case ProblemKind::Restricted: return "restricted";
    case ProblemKind::Partial: return "partial:" + format_double(p.eps);
    case ProblemKind::RelaxedDual: return "relaxed-dual:" + format_double(p.eps);
  }
  return "primal";
}

DualityReport run_problem(const MaterializedInstance& mi, const ProblemSpec& problem, const SolverConfig& cfg) {
  auto reference = [&]() -> const TransportPlan& {
    if (!mi.reference) throw std::invalid_argument("instance defines no finite-cost reference plan");
    return *mi.reference;
  };
  switch (problem.kind) {
    case ProblemKind::Primal: return solve_primal(mi.cost, mi.mu, mi.nu, cfg);
    case ProblemKind::Dual: return solve_dual(mi.cost, mi.mu, mi.nu, cfg);
    case ProblemKind::Partial: return solve_partial(mi.cost, mi.mu, mi.nu, problem.eps, cfg);
    case ProblemKind::Restricted: return solve_restricted_primal(mi.cost, reference(), cfg);
    case ProblemKind::RelaxedDual: return solve_relaxed_dual(mi.cost, mi.mu, mi.nu, reference(), problem.eps, cfg);
  }
  throw std::logic_error("run_problem: unknown problem kind");
}

// ---- results ---------------------------------------------------------------

ResultFile make_result(const InstanceFile& inst, const ProblemSpec& problem, const DualityReport& report) {
  ResultFile r;
  r.instance = inst;
  r.problem = problem;
  r.status = "optimal";
  r.primal_value = report.primal_value;
  r.dual_value = report.dual_value;
  r.gap = report.gap();
  if (report.optimal_plan) {
    r.plan_kind = report.optimal_plan->kind();
    r.plan.assign(report.optimal_plan->mass().begin(), report.optimal_plan->mass().end());
  }
  if (report.optimal_potentials) {
    r.phi.assign(report.optimal_potentials->phi().begin(), report.optimal_potentials->phi().end());
    r.psi.assign(report.optimal_potentials->psi().begin(), report.optimal_potentials->psi().end());
  }
  r.iterations = report.stats.iterations;
  r.pivots = report.stats.pivots;
  r.degenerate_pivots = report.stats.degenerate_pivots;
  return r;
}

std::string serialize_result(const ResultFile& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["instance"] = instance_to_json(r.instance);
  j["problem"] = to_string(r.problem);
  j["status"] = r.status;
  if (!r.message.empty()) j["message"] = r.message;
  if (r.status == "optimal") {
    json rep;
    rep["primal_value"] = extended_to_json(r.primal_value);
    rep["dual_value"] = extended_to_json(r.dual_value);
    rep["gap"] = r.gap;
    if (r.plan_kind) {
      json plan;
      plan["kind"] = plan_kind_name(*r.plan_kind);
      plan["mass"] = r.plan;
      rep["plan"] = std::move(plan);
    }
    if (!r.phi.empty()) {
      json pot;
      json phi = json::array(), psi = json::array();
      for (const auto& e : r.phi) phi.push_back(extended_to_json(e));
      for (const auto& e : r.psi) psi.push_back(extended_to_json(e));
      pot["phi"] = std::move(phi);
      pot["psi"] = std::move(psi);
      rep["potentials"] = std::move(pot);
    }
    json stats;
    stats["iterations"] = r.iterations;
    stats["pivots"] = r.pivots;
    stats["degenerate_pivots"] = r.degenerate_pivots;
    rep["stats"] = std::move(stats);
    j["report"] = std::move(rep);
  }
  return to_text(j);
}

ResultFile parse_result(const std::string& text) {
  const json j = parse_json(text);
  reject_unknown(j, {"schema_version", "instance", "problem", "status", "message", "report"}, "result");
  ResultFile r;
  r.schema_version = as_int(require(j, "schema_version", "result"), "schema_version");
  if (r.schema_version != kSchemaVersion) throw ParseError("result: unsupported schema_version");
  r.instance = instance_from_json(require(j, "instance", "result"));
  const json& problem = require(j, "problem", "result");
  if (!problem.is_string()) throw ParseError("result: problem must be a string");
  try {
    r.problem = parse_problem(problem.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("result: ") + e.what());
  }
  const json& status = require(j, "status", "result");
  if (!status.is_string()) throw ParseError("result: status must be a string");
  r.status = status.get<std::string>();
  if (j.contains("message")) r.message = j["message"].get<std::string>();
  if (!j.contains("report")) return r;
  const json& rep = j["report"];
  reject_unknown(rep, {"primal_value", "dual_value", "gap", "plan", "potentials", "stats"}, "report");
  r.primal_value = as_extended(require(rep, "primal_value", "report"), "primal_value");
  r.dual_value = as_extended(require(rep, "dual_value", "report"), "dual_value");
  r.gap = as_double(require(rep, "gap", "report"), "gap");
  if (rep.contains("plan")) {
    const json& plan = rep["plan"];
    reject_unknown(plan, {"kind", "mass"}, "plan");
    const auto kind = require(plan, "kind", "plan").get<std::string>();
    if (kind == "exact-coupling") r.plan_kind = PlanKind::ExactCoupling;
    else if (kind == "sub-coupling") r.plan_kind = PlanKind::SubCoupling;
    else throw ParseError("plan: unknown kind '" + kind + "'");
    r.plan = as_vector(require(plan, "mass", "plan"), "plan.mass");
  }
  if (rep.contains("potentials")) {
    const json& pot = rep["potentials"];
    reject_unknown(pot, {"phi", "psi"}, "potentials");
    for (const auto& v : require(pot, "phi", "potentials")) r.phi.push_back(as_extended(v, "phi"));
    for (const auto& v : require(pot, "psi", "potentials")) r.psi.push_back(as_extended(v, "psi"));
  }
  if (rep.contains("stats")) {
    const json& st = rep["stats"];
    reject_unknown(st, {"iterations", "pivots", "degenerate_pivots"}, "stats");
    r.iterations = require(st, "iterations", "stats").get<long>();
    r.pivots = require(st, "pivots", "stats").get<long>();
    r.degenerate_pivots = require(st, "degenerate_pivots", "stats").get<long>();
  }
  return r;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace mkdual
