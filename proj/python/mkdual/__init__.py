"""Finite optimal transport duality solvers."""

from ._core import (
    ParseError,
    SolveError,
    ap_cost,
    check_strong_ccm,
    estimate_p_rel,
    ex33_cost,
    golden_shift,
    rho_k,
    solve_dual,
    solve_instance,
    solve_partial,
    solve_primal,
    solve_relaxed_dual,
    solve_restricted_primal,
)

__all__ = [
    "ParseError",
    "SolveError",
    "ap_cost",
    "check_strong_ccm",
    "estimate_p_rel",
    "ex33_cost",
    "golden_shift",
    "rho_k",
    "solve_dual",
    "solve_instance",
    "solve_partial",
    "solve_primal",
    "solve_relaxed_dual",
    "solve_restricted_primal",
]
