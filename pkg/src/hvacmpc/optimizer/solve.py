"""LP backend dispatch and exhaustive small-binary MILP enumeration."""

from __future__ import annotations

import itertools
import time

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .problem import EQ, GE, LE, LinearProgram, MilpSpec, SolveResult, SolverError
from .simplex import solve_simplex

# above this size the dense-tableau simplex is routed to HiGHS
_SIMPLEX_MAX_ROWS = 250
_SIMPLEX_MAX_COLS = 600


def _solve_highs(lp: LinearProgram) -> SolveResult:
    t0 = time.perf_counter()
    a = sp.coo_matrix((lp.a_vals, (lp.a_rows, lp.a_cols)),
                      shape=(lp.n_rows, lp.n_vars)).tocsr()
    le = lp.senses == LE
    ge = lp.senses == GE
    eq = lp.senses == EQ
    a_ub = sp.vstack([a[le], -a[ge]]) if (le.any() or ge.any()) else None
    b_ub = np.concatenate([lp.rhs[le], -lp.rhs[ge]]) if a_ub is not None else None
    a_eq = a[eq] if eq.any() else None
    b_eq = lp.rhs[eq] if eq.any() else None
    bounds = np.column_stack([lp.lb, lp.ub])
    # interior point with crossover: markedly faster than dual simplex on the
    # long-horizon staircase LPs, and still returns a vertex solution
    res = linprog(lp.c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                  bounds=bounds, method="highs-ipm")
    wall = time.perf_counter() - t0
    if res.status == 0:
        x = np.clip(res.x, lp.lb, lp.ub)
        return SolveResult("optimal", x=x, objective=float(lp.c @ x),
                           iterations=int(res.nit), wall_time=wall)
    if res.status == 2:
        return SolveResult("infeasible", iterations=int(res.nit), wall_time=wall)
    if res.status == 3:
        return SolveResult("unbounded", iterations=int(res.nit), wall_time=wall)
    raise SolverError(f"LP backend failure: {res.message}")


def solve_lp(lp: LinearProgram, backend: str = "auto") -> SolveResult:
    """Solve an LP. Backends: 'simplex' (own tableau solver), 'highs', 'auto'."""
    if backend == "auto":
        small = lp.n_rows <= _SIMPLEX_MAX_ROWS and lp.n_vars <= _SIMPLEX_MAX_COLS
        backend = "simplex" if small else "highs"
    if backend == "simplex":
        return solve_simplex(lp)
    if backend == "highs":
        return _solve_highs(lp)
    raise ValueError(f"unknown LP backend {backend!r}")


def solve_binary_milp(m: MilpSpec, backend: str = "auto") -> SolveResult:
    """Enumerate all binary assignments and return the best feasible LP solution.

    Ties (within 1e-9 on the objective) are broken by preferring more binaries
    at 1, then the lexicographically smallest assignment.
    """
    t0 = time.perf_counter()
    nb = m.binary_idx.size
    if nb == 0:
        res = solve_lp(m.lp, backend)
        res.binary_assignment = np.empty(0, dtype=np.int64)
        res.wall_time = time.perf_counter() - t0
        return res

    best: SolveResult | None = None
    best_assign: tuple[int, ...] | None = None
    total_iters = 0
    for assign in itertools.product((0, 1), repeat=nb):
        vals = np.array(assign, dtype=float)
        sub = m.lp.with_bounds(m.binary_idx, vals, vals)
        res = solve_lp(sub, backend)
        total_iters += res.iterations
        if not res.is_optimal:
            continue
        if best is None:
            take = True
        elif res.objective < best.objective - 1e-9:
            take = True
        elif res.objective <= best.objective + 1e-9:
            take = _tie_prefers(assign, best_assign)
        else:
            take = False
        if take:
            best = res
            best_assign = assign
    wall = time.perf_counter() - t0
    if best is None:
        return SolveResult("infeasible", iterations=total_iters, wall_time=wall)
    best.binary_assignment = np.array(best_assign, dtype=np.int64)
    best.iterations = total_iters
    best.wall_time = wall
    return best


def _tie_prefers(new: tuple[int, ...], cur: tuple[int, ...]) -> bool:
    """True if `new` wins the tie-break against the incumbent `cur`."""
    if sum(new) != sum(cur):
        return sum(new) > sum(cur)
    return new < cur
