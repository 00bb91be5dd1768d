#include <unistd.h>

#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "mkdual/commands.hpp"
#include "mkdual/io.hpp"

using namespace mkdual;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const fs::path p = fs::temp_directory_path() / ("mkdual_test_io_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p;
}

std::string write(const std::string& name, const std::string& text) {
  const std::string path = (scratch() / name).string();
  write_text_file(path, text);
  return path;
}

struct Run {
  int code;
  std::string out, err;
};

template <typename Fn>
Run run(Fn fn, SolverConfig cfg = {}, std::string out_path = "") {
  std::ostringstream out, err;
  const CommandContext ctx{cfg, std::move(out_path), &out, &err};
  const int code = fn(ctx);
  return {code, out.str(), err.str()};
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

const char* kExplicit = R"({
  "schema_version": 1,
  "kind": "explicit",
  "cost": [[0, 1, "inf"], [2, 0.1, 3], ["inf", 5, 0]],
  "mu": [0.25, 0.25, 0.5],
  "nu": [0.5, 0.25, 0.25],
  "mu_labels": ["a", "b", "c"],
  "seed": 7
})";

}  // namespace

TEST_CASE("instance round trip") {
  const InstanceFile a = parse_instance(kExplicit);
  CHECK(a.kind == InstanceKind::Explicit);
  CHECK(a.rows == 3);
  CHECK(a.cost[2].is_pos_inf());
  CHECK(a.mu_labels.size() == 3);
  CHECK(*a.seed == 7);
  const std::string text = serialize_instance(a);
  const InstanceFile b = parse_instance(text);
  CHECK(serialize_instance(b) == text);
  for (std::size_t k = 0; k < a.cost.size(); ++k) CHECK(a.cost[k] == b.cost[k]);
  for (std::size_t k = 0; k < 3; ++k) CHECK(same_bits(a.mu[k], b.mu[k]));

  // Awkward floats survive.
  InstanceFile c = a;
  c.cost[1] = Extended(0.1 + 0.2);
  c.cost[4] = Extended(1e-300);
  c.mu = {1.0 / 3, 1.0 / 3, 1.0 - 2.0 / 3};
  const InstanceFile d = parse_instance(serialize_instance(c));
  CHECK(same_bits(d.cost[1].value(), 0.1 + 0.2));
  CHECK(same_bits(d.cost[4].value(), 1e-300));
  CHECK(same_bits(d.mu[0], 1.0 / 3));

  const InstanceFile ap = parse_instance(R"({"schema_version":1,"kind":"ap","n":24,"shift":"auto-golden"})");
  CHECK(!ap.shift);
  CHECK(parse_instance(serialize_instance(ap)).n == 24);
  const InstanceFile ex = parse_instance(R"({"schema_version":1,"kind":"ex33","n":12,"shift":5,"k_max":6})");
  CHECK(*ex.k_max == 6);
  CHECK(serialize_instance(parse_instance(serialize_instance(ex))) == serialize_instance(ex));
}

TEST_CASE("instance validation") {
  CHECK_THROWS_AS(parse_instance(R"({"schema_version":1,"kind":"ap","n":8,"colour":1})"), ParseError);
  CHECK_THROWS_AS(parse_instance(R"({"schema_version":2,"kind":"ap","n":8})"), ParseError);
  CHECK_THROWS_AS(parse_instance(R"({"schema_version":1,"kind":"torus","n":8})"), ParseError);
  CHECK_THROWS_AS(parse_instance(R"({"schema_version":1,"kind":"ap"})"), ParseError);
  CHECK_THROWS_AS(parse_instance(R"({"schema_version":1,"kind":"ap","n":9})"), ParseError);
  CHECK_THROWS_AS(parse_instance(R"({"schema_version":1,"kind":"ap","n":8,"shift":2})"), ParseError);
  CHECK_THROWS_AS(parse_instance(R"({"schema_version":1,"kind":"explicit","cost":[[1,2],[3]],"mu":[1],"nu":[1]})"),
                  ParseError);
  CHECK_THROWS_AS(parse_instance(R"({"schema_version":1,"kind":"explicit","cost":[[1,"oops"]],"mu":[1],"nu":[0.5,0.5]})"),
                  ParseError);
  CHECK_THROWS_AS(parse_instance(R"({"schema_version":1,"kind":"explicit","cost":[[1,-2]],"mu":[1],"nu":[0.5,0.5]})"),
                  ParseError);
  CHECK_THROWS_AS(parse_instance(R"({"schema_version":1,"kind":"explicit","cost":[[1,2]],"mu":[1],"nu":[0.5,0.6]})"),
                  ParseError);
  try {
    parse_instance("{\n  \"schema_version\": 1,\n  \"kind\": ap\n}");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    CHECK(std::string(e.what()).find("column") != std::string::npos);
  }
}

TEST_CASE("materialize") {
  const MaterializedInstance e = materialize(parse_instance(kExplicit));
  CHECK_FALSE(e.reference);  // the product coupling would charge an infinite cell
  const MaterializedInstance f =
      materialize(parse_instance(R"({"schema_version":1,"kind":"explicit","cost":[[1,2],[3,4]],"mu":[0.5,0.5],"nu":[0.5,0.5]})"));
  REQUIRE(f.reference);
  CHECK((*f.reference)(0, 1) == doctest::Approx(0.25));

  const MaterializedInstance ap = materialize(parse_instance(R"({"schema_version":1,"kind":"ap","n":8,"shift":3})"));
  CHECK(ap.cost.finite_count() == 16);
  REQUIRE(ap.reference);
  CHECK((*ap.reference)(0, 0) == doctest::Approx(1.0 / 16));
  CHECK((*ap.reference)(0, 3) == doctest::Approx(1.0 / 16));

  const MaterializedInstance ex = materialize(parse_instance(R"({"schema_version":1,"kind":"ex33","n":12,"shift":5})"));
  CHECK(ex.k_max == 11);
  CHECK(ex.cost.finite_count() == 144);
  std::size_t support = 0;
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) support += ex.reference->in_support(i, j);
  CHECK(support == 12 * 5);  // graphs k = 0..4
}

TEST_CASE("problem specs") {
  CHECK(parse_problem("primal").kind == ProblemKind::Primal);
  CHECK(parse_problem("partial:0.25").eps == 0.25);
  CHECK(parse_problem("relaxed-dual:1e-3").kind == ProblemKind::RelaxedDual);
  CHECK(to_string(parse_problem("relaxed-dual:1e-3")) == "relaxed-dual:0.001");
  CHECK_THROWS(parse_problem("partial"));
  CHECK_THROWS(parse_problem("primal:0.1"));
  CHECK_THROWS(parse_problem("partial:abc"));
  CHECK_THROWS(parse_problem("sideways"));
}

TEST_CASE("result round trip and determinism") {
  const std::vector<std::string> problems{"primal", "dual", "partial:0.3", "restricted", "relaxed-dual:0.01"};
  const InstanceFile inst =
      parse_instance(R"({"schema_version":1,"kind":"explicit","cost":[[1,2,0.5],[3,4,1e-3]],"mu":[0.3,0.7],"nu":[0.2,0.3,0.5]})");
  const MaterializedInstance mi = materialize(inst);
  for (const auto& p : problems) {
    const ProblemSpec spec = parse_problem(p);
    const std::string first = serialize_result(make_result(inst, spec, run_problem(mi, spec, {})));
    const ResultFile parsed = parse_result(first);
    CHECK(serialize_result(parsed) == first);
    const std::string again = serialize_result(make_result(parsed.instance, parsed.problem,
                                                           run_problem(materialize(parsed.instance), parsed.problem, {})));
    CHECK(again == first);
  }
  ResultFile failed;
  failed.instance = inst;
  failed.status = "infeasible";
  failed.message = "no coupling";
  const std::string text = serialize_result(failed);
  CHECK(serialize_result(parse_result(text)) == text);
  CHECK_THROWS_AS(parse_result(R"({"schema_version":1})"), ParseError);
}

TEST_CASE("cmd_solve exit codes") {
  const std::string ap = write("ap8.json", R"({"schema_version":1,"kind":"ap","n":8,"shift":3})");
  const std::string out = (scratch() / "ap8.result.json").string();
  Run r = run([&](auto& ctx) { return cmd_solve(ctx, ap, "primal"); }, {}, out);
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("primal value: 1\n") != std::string::npos);
  const ResultFile res = parse_result(read_text_file(out));
  CHECK(res.primal_value == Extended(1.0));

  const std::string zero = write("zero.json",
                                 R"({"schema_version":1,"kind":"explicit","cost":[[0,1],[1,0]],"mu":[0.5,0.5],"nu":[0.5,0.5]})");
  r = run([&](auto& ctx) { return cmd_solve(ctx, zero, "primal"); });
  CHECK(r.out.find("primal value: 0\n") != std::string::npos);
  r = run([&](auto& ctx) { return cmd_solve(ctx, zero, "partial:1"); });
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("primal value: 0\n") != std::string::npos);

  const std::string blocked = write(
      "blocked.json", R"({"schema_version":1,"kind":"explicit","cost":[["inf","inf"],[1,1]],"mu":[0.5,0.5],"nu":[0.5,0.5]})");
  const std::string blocked_out = (scratch() / "blocked.result.json").string();
  r = run([&](auto& ctx) { return cmd_solve(ctx, blocked, "primal"); }, {}, blocked_out);
  CHECK(r.code == kExitInfeasible);
  CHECK(parse_result(read_text_file(blocked_out)).status == "infeasible");

  SolverConfig tight;
  tight.max_iterations = 1;
  const std::string big = write("big.json", serialize_instance(parse_instance(R"({"schema_version":1,"kind":"ap","n":64})")));
  r = run([&](auto& ctx) { return cmd_solve(ctx, big, "primal"); }, tight);
  CHECK(r.code == kExitIterationLimit);

  r = run([&](auto& ctx) { return cmd_solve(ctx, (scratch() / "missing.json").string(), "primal"); });
  CHECK(r.code == kExitUsage);
  const std::string broken = write("broken.json", "{\"schema_version\": 1,\n\"kind\": }");
  r = run([&](auto& ctx) { return cmd_solve(ctx, broken, "primal"); });
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("line 2") != std::string::npos);
  r = run([&](auto& ctx) { return cmd_solve(ctx, ap, "partial"); });
  CHECK(r.code == kExitUsage);
}

TEST_CASE("cmd_sweep tables") {
  const std::string f = write("f.json", R"({"schema_version":1,"kind":"explicit","cost":[[1,2],[3,0]],"mu":[0.5,0.5],"nu":[0.5,0.5]})");
  Run r = run([&](auto& ctx) { return cmd_sweep(ctx, f, "epsilon-primal", {0.1, 0.01, 0.001}); });
  REQUIRE(r.code == kExitOk);
  std::istringstream lines(r.out);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "parameter,value,iterations,wall_ms");
  CHECK(rows[1].rfind("0.10000000000000001,", 0) == 0);
  CHECK(rows[4].rfind("0,", 0) == 0);
  const double limit = std::stod(rows[4].substr(2));
  CHECK(limit == doctest::Approx(0.5).epsilon(1e-6));

  const std::string ap = write("ap8s.json", R"({"schema_version":1,"kind":"ap","n":8,"shift":3})");
  r = run([&](auto& ctx) { return cmd_sweep(ctx, ap, "epsilon-dual", {}); });
  CHECK(r.code == kExitOk);
  r = run([&](auto& ctx) { return cmd_sweep(ctx, ap, "n-scaling", {8, 16, 24}); });
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("\n16,1,") != std::string::npos);
  r = run([&](auto& ctx) { return cmd_sweep(ctx, ap, "n-scaling", {16, 8}); });
  CHECK(r.code == kExitUsage);
  r = run([&](auto& ctx) { return cmd_sweep(ctx, ap, "epsilon-primal", {0.01, 0.1}); });
  CHECK(r.code == kExitUsage);
  r = run([&](auto& ctx) { return cmd_sweep(ctx, ap, "sideways", {}); });
  CHECK(r.code == kExitUsage);
}

TEST_CASE("cmd_diagnose tables") {
  const std::string ap = write("ap24.json", R"({"schema_version":1,"kind":"ap","n":24,"shift":7})");
  Run r = run([&](auto& ctx) { return cmd_diagnose(ctx, ap, "ccm", {}); });
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("strong_ccm,1") != std::string::npos);
  r = run([&](auto& ctx) { return cmd_diagnose(ctx, ap, "bound", {}); });
  CHECK(r.code == kExitOk);
  CHECK(r.out.find(",0\n") == std::string::npos);
  const std::string ex = write("ex24.json", R"({"schema_version":1,"kind":"ex33","n":24})");
  r = run([&](auto& ctx) { return cmd_diagnose(ctx, ex, "singular", {}); });
  CHECK(r.code == kExitOk);
  CHECK(r.out.rfind("eps,delta,profile,l1_to_limit,positive_part\n", 0) == 0);
  r = run([&](auto& ctx) { return cmd_diagnose(ctx, ex, "bound", {}); });
  CHECK(r.code == kExitUsage);
}

TEST_CASE("cmd_gen") {
  GenParams p;
  p.kind = "explicit";
  p.rows = 5;
  p.cols = 3;
  p.seed = 42;
  const Run a = run([&](auto& ctx) { return cmd_gen(ctx, p); });
  const Run b = run([&](auto& ctx) { return cmd_gen(ctx, p); });
  CHECK(a.code == kExitOk);
  CHECK(a.out == b.out);
  CHECK(parse_instance(a.out).rows == 5);
  p.seed = 43;
  CHECK(run([&](auto& ctx) { return cmd_gen(ctx, p); }).out != a.out);
  p.kind = "ex33";
  p.n = 24;
  CHECK(parse_instance(run([&](auto& ctx) { return cmd_gen(ctx, p); }).out).kind == InstanceKind::Ex33);
  p.kind = "ap";
  p.n = 9;
  CHECK(run([&](auto& ctx) { return cmd_gen(ctx, p); }).code == kExitUsage);
  CHECK(parse_grid("0.1,1e-2") == std::vector<double>{0.1, 0.01});
  CHECK_THROWS(parse_grid("0.1,,2"));
}
