import json
import math

import pytest

import mkdual


def test_ap_value_is_one():
    n = 8
    c = mkdual.ap_cost(n)
    u = [1.0 / n] * n
    p = mkdual.solve_primal(c, u, u)
    d = mkdual.solve_dual(c, u, u)
    assert p["primal_value"] == pytest.approx(1.0, abs=1e-9)
    assert d["dual_value"] == pytest.approx(1.0, abs=1e-9)
    assert sum(map(sum, p["plan"])) == pytest.approx(1.0)


def test_forbidden_cells_and_ccm():
    inf = math.inf
    c = [[1.0, inf], [inf, 1.0]]
    r = mkdual.solve_primal(c, [0.5, 0.5], [0.5, 0.5])
    assert r["primal_value"] == pytest.approx(1.0)
    ok, witness = mkdual.check_strong_ccm(c, r["plan"], r["phi"], r["psi"])
    assert ok and witness is None


def test_partial_full_budget_is_zero():
    r = mkdual.solve_partial([[3.0, 4.0], [5.0, 6.0]], [0.5, 0.5], [0.5, 0.5], 1.0)
    assert r["primal_value"] == 0.0


def test_infeasible_raises():
    inf = math.inf
    with pytest.raises(mkdual.SolveError):
        mkdual.solve_primal([[inf, inf], [1.0, 1.0]], [0.5, 0.5], [0.5, 0.5])


def test_solve_instance_json():
    text = json.dumps({"schema_version": 1, "kind": "ap", "n": 8, "shift": 3})
    out = json.loads(mkdual.solve_instance(text, "primal"))
    assert out["status"] == "optimal"
    assert out["report"]["primal_value"] == pytest.approx(1.0)
    with pytest.raises(mkdual.ParseError):
        mkdual.solve_instance('{"schema_version": 1, "kind": "ap", "n": 8, "bogus": 1}')


def test_rho_and_shift():
    assert mkdual.rho_k(8, 3, 0, 0) == 1
    assert mkdual.rho_k(8, 3, 0, 1) == 2
    assert mkdual.rho_k(8, 3, 4, 1) == 0
    assert math.gcd(mkdual.golden_shift(24), 24) == 1
