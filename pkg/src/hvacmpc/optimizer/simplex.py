"""Bounded-variable tableau simplex with Bland's-rule anti-cycling.

Two equivalent phase kernels are provided: a numba-compiled one with explicit
loops and a vectorized numpy fallback (selected via HVACMPC_NO_NUMBA). Both
are deterministic and must produce identical pivot sequences; the test suite
asserts this.

Variable status codes: 0 basic, 1 nonbasic at lower bound, 2 nonbasic at
upper bound, 3 nonbasic free (held at zero).
"""

from __future__ import annotations

import time
import warnings

import numpy as np

from .._accel import NUMBA_ENABLED, njit
from .problem import EQ, GE, LE, LinearProgram, SolveResult, SolverError

# Phase return codes
_OPTIMAL, _UNBOUNDED, _MAXITER = 0, 1, 2

TOL_PIVOT = 1e-9
TOL_DJ = 1e-9        # reduced-cost tolerance
TOL_FEAS = 1e-7      # scaled primal feasibility
_BLAND_AFTER = 40    # consecutive degenerate steps before switching rule


def _phase_numpy(T, xB, basis, vstat, lb, ub, c, max_iter):
    nrows, ncols = T.shape
    degen_run = 0
    it = 0
    basic_mask = np.zeros(ncols, dtype=bool)
    while it < max_iter:
        it += 1
        basic_mask[:] = False
        basic_mask[basis] = True
        d = c - T.T @ c[basis]
        score = np.full(ncols, -np.inf)
        at_lo = vstat == 1
        at_up = vstat == 2
        free = vstat == 3
        score[at_lo] = -d[at_lo]
        score[at_up] = d[at_up]
        score[free] = np.abs(d[free])
        score[basic_mask] = -np.inf
        score[ub - lb <= 0.0] = -np.inf  # fixed variables never enter
        if degen_run > _BLAND_AFTER:
            cand = np.nonzero(score > TOL_DJ)[0]
            if cand.size == 0:
                return _OPTIMAL, it
            j = int(cand[0])
        else:
            j = int(np.argmax(score))
            if score[j] <= TOL_DJ:
                return _OPTIMAL, it
        dirn = 1.0
        if vstat[j] == 2 or (vstat[j] == 3 and d[j] > 0.0):
            dirn = -1.0

        col = T[:, j]
        delta = dirn * col
        t_arr = np.full(nrows, np.inf)
        pos = delta > TOL_PIVOT
        neg = delta < -TOL_PIVOT
        with np.errstate(invalid="ignore"):
            t_arr[pos] = (xB[pos] - lb[basis[pos]]) / delta[pos]
            t_arr[neg] = (xB[neg] - ub[basis[neg]]) / delta[neg]
        t_arr[np.isnan(t_arr)] = np.inf
        np.maximum(t_arr, 0.0, out=t_arr)
        t_own = ub[j] - lb[j] if vstat[j] != 3 else np.inf
        t_row = float(t_arr.min()) if nrows else np.inf
        if not np.isfinite(t_row) and not np.isfinite(t_own):
            return _UNBOUNDED, it
        if t_own <= t_row:
            # bound flip, no pivot
            xB -= t_own * delta
            vstat[j] = 2 if vstat[j] == 1 else 1
            degen_run = degen_run + 1 if t_own <= 1e-10 else 0
            continue
        ties = np.nonzero(t_arr <= t_row + 1e-12)[0]
        r = int(ties[np.argmin(basis[ties])])
        t = float(t_arr[r])
        enter_start = lb[j] if vstat[j] == 1 else (ub[j] if vstat[j] == 2 else 0.0)
        leaving = int(basis[r])
        xB -= t * delta
        xB[r] = enter_start + dirn * t
        vstat[leaving] = 1 if delta[r] > 0.0 else 2
        colj = col.copy()
        piv = colj[r]
        T[r, :] /= piv
        colj[r] = 0.0
        T -= np.outer(colj, T[r, :])
        T[:, j] = 0.0
        T[r, j] = 1.0
        basis[r] = j
        vstat[j] = 0
        degen_run = degen_run + 1 if t <= 1e-10 else 0
    return _MAXITER, it


@njit(cache=True)
def _phase_numba(T, xB, basis, vstat, lb, ub, c, max_iter):  # pragma: no cover
    nrows, ncols = T.shape
    degen_run = 0
    it = 0
    d = np.empty(ncols)
    while it < max_iter:
        it += 1
        for j in range(ncols):
            d[j] = c[j]
        for i in range(nrows):
            cb = c[basis[i]]
            if cb != 0.0:
                for j in range(ncols):
                    d[j] -= cb * T[i, j]
        bland = degen_run > _BLAND_AFTER
        j_enter = -1
        best = TOL_DJ
        for j in range(ncols):
            s = vstat[j]
            if s == 0 or ub[j] - lb[j] <= 0.0:
                continue
            if s == 1:
                sc = -d[j]
            elif s == 2:
                sc = d[j]
            else:
                sc = abs(d[j])
            if sc > best:
                j_enter = j
                if bland:
                    break
                best = sc
        if j_enter == -1:
            return _OPTIMAL, it
        j = j_enter
        dirn = 1.0
        if vstat[j] == 2 or (vstat[j] == 3 and d[j] > 0.0):
            dirn = -1.0

        t_row = np.inf
        r = -1
        for i in range(nrows):
            delta_i = dirn * T[i, j]
            bi = basis[i]
            if delta_i > TOL_PIVOT:
                if lb[bi] == -np.inf:
                    continue
                ti = (xB[i] - lb[bi]) / delta_i
            elif delta_i < -TOL_PIVOT:
                if ub[bi] == np.inf:
                    continue
                ti = (xB[i] - ub[bi]) / delta_i
            else:
                continue
            if ti < 0.0:
                ti = 0.0
            if ti < t_row - 1e-12 or (ti <= t_row + 1e-12 and (r == -1 or bi < basis[r])):
                if ti < t_row:
                    t_row = ti
                r = i
        t_own = np.inf
        if vstat[j] != 3:
            t_own = ub[j] - lb[j]
        if t_row == np.inf and t_own == np.inf:
            return _UNBOUNDED, it
        if t_own <= t_row:
            for i in range(nrows):
                xB[i] -= t_own * dirn * T[i, j]
            vstat[j] = 2 if vstat[j] == 1 else 1
            degen_run = degen_run + 1 if t_own <= 1e-10 else 0
            continue
        t = t_row
        if vstat[j] == 1:
            enter_start = lb[j]
        elif vstat[j] == 2:
            enter_start = ub[j]
        else:
            enter_start = 0.0
        leaving = basis[r]
        delta_r = dirn * T[r, j]
        for i in range(nrows):
            xB[i] -= t * dirn * T[i, j]
        xB[r] = enter_start + dirn * t
        vstat[leaving] = 1 if delta_r > 0.0 else 2
        piv = T[r, j]
        for q in range(ncols):
            T[r, q] /= piv
        for i in range(nrows):
            if i == r:
                continue
            f = T[i, j]
            if f != 0.0:
                for q in range(ncols):
                    T[i, q] -= f * T[r, q]
        for i in range(nrows):
            T[i, j] = 0.0
        T[r, j] = 1.0
        basis[r] = j
        vstat[j] = 0
        degen_run = degen_run + 1 if t <= 1e-10 else 0
    return _MAXITER, it


def _run_phase(T, xB, basis, vstat, lb, ub, c, max_iter, force_numpy=False):
    if NUMBA_ENABLED and not force_numpy:
        return _phase_numba(T, xB, basis, vstat, lb, ub, c, max_iter)
    return _phase_numpy(T, xB, basis, vstat, lb, ub, c, max_iter)


def _geometric_scaling(a: np.ndarray, passes: int = 2):
    """Geometric-mean row/column equilibration factors for a dense matrix."""
    nrows, ncols = a.shape
    rscale = np.ones(nrows)
    cscale = np.ones(ncols)
    w = a.copy()
    for _ in range(passes):
        for axis, scale in ((1, rscale), (0, cscale)):
            absw = np.abs(w)
            absw[absw == 0] = np.nan
            # rows/columns with no nonzeros keep a unit factor
            with np.errstate(all="ignore"), warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                g = np.sqrt(np.nanmax(absw, axis=axis) * np.nanmin(absw, axis=axis))
            g = np.where(np.isfinite(g) & (g > 0), g, 1.0)
            if axis == 1:
                w /= g[:, None]
                scale *= g
            else:
                w /= g[None, :]
                scale *= g
    return 1.0 / rscale, 1.0 / cscale


def solve_simplex(lp: LinearProgram, max_iter: int | None = None,
                  force_numpy: bool = False) -> SolveResult:
    """Two-phase bounded-variable simplex on a dense tableau."""
    t0 = time.perf_counter()
    n = lp.n_vars
    m = lp.n_rows

    if m == 0:
        # pure bound minimization
        x = np.where(lp.c > 0, lp.lb, np.where(lp.c < 0, lp.ub, np.where(
            np.isfinite(lp.lb), lp.lb, np.where(np.isfinite(lp.ub), lp.ub, 0.0))))
        if not np.all(np.isfinite(x[lp.c != 0])):
            return SolveResult("unbounded", wall_time=time.perf_counter() - t0)
        x = np.where(np.isfinite(x), x, 0.0)
        return SolveResult("optimal", x=x, objective=float(lp.c @ x),
                           wall_time=time.perf_counter() - t0)

    a = lp.dense_matrix()
    rsc, csc = _geometric_scaling(a)
    a = a * rsc[:, None] * csc[None, :]
    b = lp.rhs * rsc
    c_struct = lp.c * csc
    with np.errstate(invalid="ignore"):
        lb_s = lp.lb / csc
        ub_s = lp.ub / csc

    n_slack = int(np.sum(lp.senses != EQ))
    ncols = n + n_slack + m
    T = np.zeros((m, ncols))
    T[:, :n] = a
    lb_all = np.empty(ncols)
    ub_all = np.empty(ncols)
    lb_all[:n] = lb_s
    ub_all[:n] = ub_s
    s = n
    for i in range(m):
        if lp.senses[i] == LE:
            T[i, s] = 1.0
            lb_all[s], ub_all[s] = 0.0, np.inf
            s += 1
        elif lp.senses[i] == GE:
            T[i, s] = 1.0
            lb_all[s], ub_all[s] = -np.inf, 0.0
            s += 1
    # initial nonbasic values: finite bound nearest zero, free variables at 0
    vstat = np.empty(ncols, dtype=np.int64)
    x0 = np.zeros(ncols)
    for j in range(n + n_slack):
        lo, hi = lb_all[j], ub_all[j]
        if np.isfinite(lo) and (abs(lo) <= abs(hi) or not np.isfinite(hi)):
            vstat[j], x0[j] = 1, lo
        elif np.isfinite(hi):
            vstat[j], x0[j] = 2, hi
        else:
            vstat[j], x0[j] = 3, 0.0

    resid = b - T[:, :n + n_slack] @ x0[:n + n_slack]
    art = n + n_slack
    basis = np.arange(art, art + m, dtype=np.int64)
    for i in range(m):
        sigma = 1.0 if resid[i] >= 0 else -1.0
        T[i, art + i] = sigma
        if sigma < 0:
            T[i, :] *= -1.0  # keep tableau = B^-1 A with B = diag(sigma)
            T[i, art + i] = 1.0
    xB = np.abs(resid)
    lb_all[art:] = 0.0
    ub_all[art:] = np.inf
    vstat[art:] = 1

    if max_iter is None:
        max_iter = max(2000, 50 * (m + ncols))

    c1 = np.zeros(ncols)
    c1[art:] = 1.0
    code, it1 = _run_phase(T, xB, basis, vstat, lb_all, ub_all, c1, max_iter,
                           force_numpy)
    if code == _MAXITER:
        raise SolverError(f"phase-1 iteration limit ({max_iter}) reached")
    if code == _UNBOUNDED:
        raise SolverError("phase-1 breakdown: unbounded infeasibility objective")
    infeas = float(np.sum(np.where(basis >= art, np.maximum(xB, 0.0), 0.0)))
    # nonbasic artificials sit at their lower bound 0 and contribute nothing
    if infeas > TOL_FEAS * (1.0 + float(np.max(np.abs(b), initial=0.0))):
        return SolveResult("infeasible", iterations=it1,
                           wall_time=time.perf_counter() - t0)

    ub_all[art:] = 0.0  # artificials pinned at zero for phase 2
    c2 = np.zeros(ncols)
    c2[:n] = c_struct
    code, it2 = _run_phase(T, xB, basis, vstat, lb_all, ub_all, c2, max_iter,
                           force_numpy)
    iters = it1 + it2
    if code == _MAXITER:
        raise SolverError(f"phase-2 iteration limit ({max_iter}) reached")
    if code == _UNBOUNDED:
        return SolveResult("unbounded", iterations=iters,
                           wall_time=time.perf_counter() - t0)

    x_all = np.empty(ncols)
    for j in range(ncols):
        if vstat[j] == 1:
            x_all[j] = lb_all[j]
        elif vstat[j] == 2:
            x_all[j] = ub_all[j]
        else:
            x_all[j] = 0.0
    x_all[basis] = xB
    x = x_all[:n] * csc
    # snap basic values marginally outside their (original) bounds
    x = np.clip(x, np.where(np.isfinite(lp.lb), lp.lb, -np.inf),
                np.where(np.isfinite(lp.ub), lp.ub, np.inf))
    return SolveResult("optimal", x=x, objective=float(lp.c @ x),
                       iterations=iters, wall_time=time.perf_counter() - t0)
