"""LP/MILP containers, feasibility checking and LP text export.

Row senses are encoded as int8: -1 for <=, 0 for =, +1 for >=.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LE, EQ, GE = -1, 0, 1

_SENSE_STR = {LE: "<=", EQ: "=", GE: ">="}


class SolverError(RuntimeError):
    """Numerical breakdown or invalid solver input."""


@dataclass
class LinearProgram:
    """min c'x  s.t.  A x {<=,=,>=} b,  l <= x <= u, with A in triplet form."""

    c: np.ndarray
    a_rows: np.ndarray
    a_cols: np.ndarray
    a_vals: np.ndarray
    senses: np.ndarray
    rhs: np.ndarray
    lb: np.ndarray
    ub: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.a_rows = np.asarray(self.a_rows, dtype=np.int64)
        self.a_cols = np.asarray(self.a_cols, dtype=np.int64)
        self.a_vals = np.asarray(self.a_vals, dtype=float)
        self.senses = np.asarray(self.senses, dtype=np.int8)
        self.rhs = np.asarray(self.rhs, dtype=float)
        self.lb = np.asarray(self.lb, dtype=float)
        self.ub = np.asarray(self.ub, dtype=float)
        n, m = self.n_vars, self.n_rows
        if self.lb.shape != (n,) or self.ub.shape != (n,):
            raise SolverError("bound vectors do not match variable count")
        if self.rhs.shape != (m,):
            raise SolverError("rhs does not match sense count")
        if not (self.a_rows.shape == self.a_cols.shape == self.a_vals.shape):
            raise SolverError("triplet arrays have inconsistent shapes")
        if self.a_rows.size and (self.a_rows.max(initial=-1) >= m or self.a_rows.min(initial=0) < 0):
            raise SolverError("row index out of range")
        if self.a_cols.size and (self.a_cols.max(initial=-1) >= n or self.a_cols.min(initial=0) < 0):
            raise SolverError("column index out of range")
        if not np.all(np.isfinite(self.a_vals)) or not np.all(np.isfinite(self.c)):
            raise SolverError("matrix/objective coefficients must be finite")
        if not np.all(np.isfinite(self.rhs)):
            raise SolverError("rhs must be finite")
        if np.any(self.lb > self.ub):
            raise SolverError("variable bounds with lb > ub")

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def n_rows(self) -> int:
        return self.senses.size

    def dense_matrix(self) -> np.ndarray:
        a = np.zeros((self.n_rows, self.n_vars))
        # accumulate duplicates instead of overwriting
        np.add.at(a, (self.a_rows, self.a_cols), self.a_vals)
        return a

    def with_bounds(self, idx, lb, ub) -> "LinearProgram":
        """Copy with tightened bounds on selected variables (used by MILP enumeration)."""
        new_lb = self.lb.copy()
        new_ub = self.ub.copy()
        new_lb[idx] = lb
        new_ub[idx] = ub
        return LinearProgram(self.c, self.a_rows, self.a_cols, self.a_vals,
                             self.senses, self.rhs, new_lb, new_ub)


@dataclass
class MilpSpec:
    """A LinearProgram plus the indices of its binary variables."""

    lp: LinearProgram
    binary_idx: np.ndarray
    max_binaries: int = 12

    def __post_init__(self):
        self.binary_idx = np.asarray(self.binary_idx, dtype=np.int64)
        if self.binary_idx.size > self.max_binaries:
            raise SolverError(
                f"{self.binary_idx.size} binaries exceed the enumeration cap "
                f"of {self.max_binaries}")
        if self.binary_idx.size != np.unique(self.binary_idx).size:
            raise SolverError("duplicate binary indices")


@dataclass
class SolveResult:
    status: str                      # optimal | infeasible | unbounded
    x: np.ndarray | None = None
    objective: float = np.nan
    iterations: int = 0
    wall_time: float = 0.0
    binary_assignment: np.ndarray | None = None

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


def max_scaled_violation(lp: LinearProgram, x: np.ndarray) -> float:
    """Largest constraint/bound violation of x, scaled by 1 + |rhs| per row."""
    x = np.asarray(x, dtype=float)
    ax = np.zeros(lp.n_rows)
    np.add.at(ax, lp.a_rows, lp.a_vals * x[lp.a_cols])
    resid = ax - lp.rhs
    scale = 1.0 + np.abs(lp.rhs)
    viol = np.zeros(lp.n_rows)
    le = lp.senses == LE
    ge = lp.senses == GE
    eq = lp.senses == EQ
    viol[le] = np.maximum(resid[le], 0.0)
    viol[ge] = np.maximum(-resid[ge], 0.0)
    viol[eq] = np.abs(resid[eq])
    row_v = float(np.max(viol / scale, initial=0.0))
    bscale = 1.0 + np.abs(x)
    lo_v = np.where(np.isfinite(lp.lb), lp.lb - x, 0.0) / bscale
    hi_v = np.where(np.isfinite(lp.ub), x - lp.ub, 0.0) / bscale
    bound_v = float(max(np.max(lo_v, initial=0.0), np.max(hi_v, initial=0.0)))
    return max(row_v, bound_v)


class LpBuilder:
    """Incremental triplet-form LP assembly."""

    def __init__(self):
        self._cost: list[float] = []
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._rows: list[np.ndarray] = []
        self._cols: list[np.ndarray] = []
        self._vals: list[np.ndarray] = []
        self._senses: list[int] = []
        self._rhs: list[float] = []

    def add_var(self, lb: float = 0.0, ub: float = np.inf, cost: float = 0.0) -> int:
        self._cost.append(cost)
        self._lb.append(lb)
        self._ub.append(ub)
        return len(self._cost) - 1

    def add_vars(self, n: int, lb=0.0, ub=np.inf, cost=0.0) -> np.ndarray:
        start = len(self._cost)
        self._cost.extend(np.broadcast_to(cost, n).tolist())
        self._lb.extend(np.broadcast_to(lb, n).tolist())
        self._ub.extend(np.broadcast_to(ub, n).tolist())
        return np.arange(start, start + n)

    def add_row(self, cols, vals, sense: int, rhs: float) -> int:
        cols = np.atleast_1d(np.asarray(cols, dtype=np.int64))
        vals = np.atleast_1d(np.asarray(vals, dtype=float))
        r = len(self._senses)
        self._rows.append(np.full(cols.size, r, dtype=np.int64))
        self._cols.append(cols)
        self._vals.append(vals)
        self._senses.append(sense)
        self._rhs.append(rhs)
        return r

    def set_bounds(self, idx, lb, ub) -> None:
        idx = np.atleast_1d(idx)
        for i, lo, hi in zip(idx, np.broadcast_to(lb, idx.size),
                             np.broadcast_to(ub, idx.size)):
            self._lb[int(i)] = float(lo)
            self._ub[int(i)] = float(hi)

    def set_cost(self, idx, cost) -> None:
        for i, c in zip(np.atleast_1d(idx), np.atleast_1d(np.broadcast_to(cost, np.size(idx)))):
            self._cost[int(i)] = float(c)

    @property
    def n_vars(self) -> int:
        return len(self._cost)

    def build(self) -> LinearProgram:
        cat = (lambda parts, dt: np.concatenate(parts) if parts else np.empty(0, dtype=dt))
        return LinearProgram(
            c=np.array(self._cost),
            a_rows=cat(self._rows, np.int64),
            a_cols=cat(self._cols, np.int64),
            a_vals=cat(self._vals, float),
            senses=np.array(self._senses, dtype=np.int8),
            rhs=np.array(self._rhs),
            lb=np.array(self._lb),
            ub=np.array(self._ub),
        )


def write_lp_text(lp: LinearProgram, path, names: list[str] | None = None) -> None:
    """Dump in CPLEX-style LP text format for cross-checking with external solvers."""
    if names is None:
        names = [f"x{j}" for j in range(lp.n_vars)]
    dense = lp.dense_matrix()

    def expr(coefs):
        terms = []
        for j, v in enumerate(coefs):
            if v == 0.0:
                continue
            sign = "+" if v >= 0 else "-"
            terms.append(f"{sign} {abs(v):.17g} {names[j]}")
        return " ".join(terms) if terms else "0 " + names[0]

    lines = ["Minimize", f" obj: {expr(lp.c)}", "Subject To"]
    for i in range(lp.n_rows):
        lines.append(f" r{i}: {expr(dense[i])} {_SENSE_STR[int(lp.senses[i])]} {lp.rhs[i]:.17g}")
    lines.append("Bounds")
    for j in range(lp.n_vars):
        lo = "-inf" if np.isneginf(lp.lb[j]) else f"{lp.lb[j]:.17g}"
        hi = "+inf" if np.isposinf(lp.ub[j]) else f"{lp.ub[j]:.17g}"
        lines.append(f" {lo} <= {names[j]} <= {hi}")
    lines.append("End")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
