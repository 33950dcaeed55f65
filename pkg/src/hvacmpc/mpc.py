"""Receding-horizon controller: two-step feasibility-then-cost optimization.

Each control step solves (1) an ancillary LP minimizing the 1-norm of comfort
bound violations, then (2) the operation MILP with comfort bounds widened by
the optimal slacks, which is feasible by construction. Decision variables are
zone heat flows (not fan speeds), keeping the problem linear; physical fan
commands are recovered afterwards by inverting the bilinear exchanger law.
"""

from __future__ import annotations

import logging
import os
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from .core import DeviceParams
from .forecast import ForecastBundle
from .optimizer import (LinearProgram, MilpSpec, solve_binary_milp, solve_lp,
                        write_lp_text)
from .optimizer.problem import EQ, GE, LE, LpBuilder
from .plant import StepDecision
from .sysid import LoopArxModel, PvusaModel, ZoneArxModel

log = logging.getLogger(__name__)

# numerical padding added to feasibility slacks before the operation problem,
# so solver-tolerance noise cannot re-introduce infeasibility
_SLACK_PAD = 1e-7

# tiny cost on battery flows: with free PV and zero grid draw, simultaneous
# charge/discharge is cost-neutral, so degenerate optima could return both
# nonzero; the regularization makes exclusivity strictly optimal without
# measurably distorting the energy cost
_BATTERY_REG = 1e-6


# ---------------------------------------------------------------------------
# Demand-Response program

@dataclass(frozen=True)
class DrRequest:
    """Price-volume request: cap the energy drawn in I(start, length) at
    `energy_bound` kWh to earn `reward`."""

    start: int
    length: int
    energy_bound: float
    reward: float

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("request length must be >= 1")
        if self.energy_bound < 0 or self.reward < 0:
            raise ValueError("energy bound and reward must be nonnegative")

    @property
    def end(self) -> int:
        return self.start + self.length


@dataclass(frozen=True)
class DrProgram:
    requests: tuple[DrRequest, ...] = ()

    def __post_init__(self):
        reqs = tuple(self.requests)
        object.__setattr__(self, "requests", reqs)
        for a in range(len(reqs)):
            for b in range(a + 1, len(reqs)):
                if not (reqs[a].end <= reqs[b].start or reqs[b].end <= reqs[a].start):
                    raise ValueError(f"DR requests {a} and {b} overlap")

    def within(self, k: int, lam: int) -> list[tuple[int, DrRequest]]:
        """Requests fully contained in I(k, lam), with their program indices."""
        return [(j, r) for j, r in enumerate(self.requests)
                if r.start >= k and r.end <= k + lam]


def dr_settlement(program: DrProgram, realized_w: np.ndarray, start_k: int = 0):
    """Settle a program against realized per-step grid consumption.

    Returns (fulfilled flags, total reward, per-request records). A request is
    fulfilled iff the realized energy over its interval is <= its bound
    (inclusive). Requests not fully covered by the trajectory are an error.
    """
    realized_w = np.asarray(realized_w, dtype=float)
    flags = np.zeros(len(program.requests), dtype=np.int64)
    records = []
    total = 0.0
    for j, r in enumerate(program.requests):
        a, b = r.start - start_k, r.end - start_k
        if a < 0 or b > realized_w.size:
            raise ValueError(f"trajectory does not cover DR request {j}")
        used = float(realized_w[a:b].sum())
        ok = used <= r.energy_bound
        flags[j] = int(ok)
        total += r.reward if ok else 0.0
        records.append({"request": j, "energy": used, "bound": r.energy_bound,
                        "fulfilled": bool(ok), "reward": r.reward if ok else 0.0})
    return flags, total, records


# ---------------------------------------------------------------------------
# Model bundle and controller history

@dataclass
class ModelBundle:
    """Identified models used by the controller for one operating mode."""

    zone: ZoneArxModel
    loop: LoopArxModel   # TES temperature (heating) or chilled return (cooling)
    pv: PvusaModel
    devices: DeviceParams


class History:
    """Rolling buffers of past measurements/inputs feeding lagged regressors."""

    def __init__(self, depth: int):
        self.depth = max(depth, 1)
        self.t: list[np.ndarray] = []
        self.h: list[np.ndarray] = []
        self.e: list[np.ndarray] = []
        self.loop_state: list[float] = []
        self.loop_outlet: list[float] = []

    def seed(self, t, h, e, loop_state, loop_outlet):
        """Fill all buffers by replication (used before the first step)."""
        for _ in range(self.depth):
            self.push(t, h, e, loop_state, loop_outlet)

    def push(self, t, h, e, loop_state, loop_outlet):
        self.t.append(np.asarray(t, dtype=float).copy())
        self.h.append(np.asarray(h, dtype=float).copy())
        self.e.append(np.asarray(e, dtype=float).copy())
        self.loop_state.append(float(loop_state))
        self.loop_outlet.append(float(loop_outlet))
        if len(self.t) > self.depth:
            for buf in (self.t, self.h, self.e, self.loop_state, self.loop_outlet):
                buf.pop(0)

    def lookup(self, buf, rel: int):
        """Value at relative time rel < 0 (rel=-1 is the most recent entry)."""
        return buf[rel]


# ---------------------------------------------------------------------------
# Horizon problem assembly

@dataclass
class OperationProblem:
    """Assembled horizon problem plus the variable layout for extraction."""

    milp: MilpSpec
    var: dict
    k: int
    lam: int
    mode: str
    dr_indices: list[int] = field(default_factory=list)


def _nonzero_template(theta_row: np.ndarray, meta: np.ndarray):
    nz = np.nonzero(theta_row)[0]
    return meta[nz], theta_row[nz]


def _add_dynamics_row(b: LpBuilder, lhs_var: int, terms_meta, terms_coef,
                      t: int, var_of_block, const_of_block):
    """Equality row lhs = sum(theta * phi) with variables/constants split by time."""
    cols = [lhs_var]
    vals = [1.0]
    rhs = 0.0
    for (blk, lag, idx), coef in zip(terms_meta, terms_coef):
        rel = t - lag
        var = var_of_block(int(blk), rel, int(idx)) if rel >= 0 else None
        if var is not None:
            cols.append(var)
            vals.append(-coef)
        else:
            rhs += coef * const_of_block(int(blk), rel, int(idx))
    b.add_row(cols, vals, EQ, rhs)


class _HorizonAssembler:
    """Shared constraint machinery for the feasibility LP and operation MILP."""

    def __init__(self, models: ModelBundle, measurements: dict,
                 forecasts: ForecastBundle, k: int, lam: int, mode: str,
                 history: History, comfort_lo: np.ndarray, comfort_hi: np.ndarray,
                 t0_bounds: tuple[float, float]):
        if mode not in ("heating", "cooling"):
            raise ValueError(f"unknown mode {mode!r}")
        self.models = models
        self.meas = measurements
        self.fc = forecasts
        self.k, self.lam, self.mode = k, lam, mode
        self.hist = history
        self.lo, self.hi = comfort_lo, comfort_hi
        self.t0_lb, self.t0_ub = t0_bounds
        self.m = models.zone.n_zones
        self.e_hat = forecasts.exo_matrix()
        if self.e_hat.shape != (lam, models.zone.n_exo):
            raise ValueError("forecast bundle does not match the zone model width")
        if comfort_lo.shape != (self.m, lam):
            raise ValueError("comfort bounds must have shape (m, lam)")
        required = ["t_zone", "e_ees"]
        required += (["t_tes", "t_hp_h"] if mode == "heating"
                     else ["t_hp_c_in", "t_hp_c"])
        missing = [key for key in required if key not in measurements]
        if missing:
            raise ValueError(f"missing measurements for {mode} mode: {missing}")
        # per-zone nonzero templates of the zone model
        self._zone_tpl = [_nonzero_template(models.zone.theta[i], models.zone.meta)
                          for i in range(self.m)]
        self._loop_tpl = _nonzero_template(models.loop.theta, models.loop.meta)

    # variable/constant lookups -------------------------------------------
    def _var_zone(self, blk: int, rel: int, idx: int):
        if blk == 0:
            return int(self.t_var[rel][idx])
        if blk == 1:
            return int(self.h_var[rel][idx]) if rel < self.lam else None
        return None  # exogenous enters as a constant

    def _const_zone(self, blk: int, rel: int, idx: int) -> float:
        if rel >= 0:
            # only exogenous terms reach here for rel >= 0
            return float(self.e_hat[rel, idx])
        if blk == 0:
            return float(self.hist.lookup(self.hist.t, rel)[idx])
        if blk == 1:
            return float(self.hist.lookup(self.hist.h, rel)[idx])
        return float(self.hist.lookup(self.hist.e, rel)[idx])

    def _var_loop(self, blk: int, rel: int, idx: int):
        if blk == 0:
            return int(self.loop_var[rel])
        if blk == 1:
            return int(self.outlet_var[rel])
        return int(self.h_var[rel][idx]) if rel < self.lam else None

    def _const_loop(self, blk: int, rel: int, idx: int) -> float:
        if blk == 0:
            return float(self.hist.lookup(self.hist.loop_state, rel))
        if blk == 1:
            return float(self.hist.lookup(self.hist.loop_outlet, rel))
        return float(self.hist.lookup(self.hist.h, rel)[idx])

    # assembly -------------------------------------------------------------
    def build_common(self, b: LpBuilder):
        m, lam = self.m, self.lam
        dev = self.models.devices
        heating = self.mode == "heating"
        t_meas = np.asarray(self.meas["t_zone"], dtype=float)
        loop_meas = self.meas["t_tes"] if heating else self.meas["t_hp_c_in"]
        outlet_meas = self.meas["t_hp_h"] if heating else self.meas["t_hp_c"]

        # heat flows: sign fixed by mode (C^h bounds added as rows below)
        if heating:
            self.h_var = [b.add_vars(m, lb=0.0, ub=np.inf) for _ in range(lam)]
        else:
            self.h_var = [b.add_vars(m, lb=-np.inf, ub=0.0) for _ in range(lam)]
        # zone temperatures T(k)..T(k+lam); T(k) pinned to the measurement
        self.t_var = [b.add_vars(m, lb=-np.inf, ub=np.inf) for _ in range(lam + 1)]
        b.set_bounds(self.t_var[0], t_meas, t_meas)
        # loop state (TES / chilled return) and HP outlet, both anchored at k
        self.loop_var = [b.add_var(-np.inf, np.inf) for _ in range(lam + 1)]
        self.outlet_var = [b.add_var(-np.inf, np.inf) for _ in range(lam + 1)]
        b.set_bounds(self.loop_var[0], loop_meas, loop_meas)
        b.set_bounds(self.outlet_var[0], outlet_meas, outlet_meas)
        self.t0_var = [b.add_var(self.t0_lb, self.t0_ub) for _ in range(lam)]

        for t in range(lam):
            # zone dynamics T(l+1) = Theta Phi(l)
            for i in range(m):
                meta_i, coef_i = self._zone_tpl[i]
                _add_dynamics_row(b, int(self.t_var[t + 1][i]), meta_i, coef_i,
                                  t, self._var_zone, self._const_zone)
            # loop dynamics and HP unit-delay
            _add_dynamics_row(b, int(self.loop_var[t + 1]), *self._loop_tpl,
                              t=t, var_of_block=self._var_loop,
                              const_of_block=self._const_loop)
            b.add_row([self.outlet_var[t + 1], self.t0_var[t]], [1.0, -1.0], EQ, 0.0)
            # HP activation: T0 >= T_TES (heating) / T0 <= T_in (cooling)
            b.add_row([self.t0_var[t], self.loop_var[t]], [1.0, -1.0],
                      GE if heating else LE, 0.0)
            # heat-exchanger actuation limits, T_snd is TES (heating) or HP
            # outlet (cooling)
            snd = self.loop_var[t] if heating else self.outlet_var[t]
            gv = dev.gamma * dev.v_max
            for i in range(m):
                b.add_row([self.h_var[t][i], snd, self.t_var[t][i]],
                          [1.0, -gv[i], gv[i]], LE if heating else GE, 0.0)


def build_feasibility_lp(models: ModelBundle, measurements: dict,
                         forecasts: ForecastBundle, k: int, lam: int, mode: str,
                         history: History, comfort_lo: np.ndarray,
                         comfort_hi: np.ndarray,
                         t0_bounds: tuple[float, float]) -> tuple[LinearProgram, dict]:
    """Slack-minimization LP: battery, PV and DR constraints are omitted."""
    asm = _HorizonAssembler(models, measurements, forecasts, k, lam, mode,
                            history, comfort_lo, comfort_hi, t0_bounds)
    b = LpBuilder()
    asm.build_common(b)
    m, lam = asm.m, asm.lam
    t_meas = np.asarray(measurements["t_zone"], dtype=float)
    slack_lo = np.empty((m, lam), dtype=np.int64)
    slack_hi = np.empty((m, lam), dtype=np.int64)
    for t in range(lam):
        for i in range(m):
            if t == 0:
                # T(k) is a constant: the slack lower bound is the violation
                need_lo = max(0.0, comfort_lo[i, 0] - t_meas[i])
                need_hi = max(0.0, t_meas[i] - comfort_hi[i, 0])
                slack_lo[i, t] = b.add_var(need_lo, np.inf, cost=1.0)
                slack_hi[i, t] = b.add_var(need_hi, np.inf, cost=1.0)
            else:
                slack_lo[i, t] = b.add_var(0.0, np.inf, cost=1.0)
                slack_hi[i, t] = b.add_var(0.0, np.inf, cost=1.0)
                tv = int(asm.t_var[t][i])
                b.add_row([tv, slack_lo[i, t]], [1.0, 1.0], GE, comfort_lo[i, t])
                b.add_row([tv, slack_hi[i, t]], [1.0, -1.0], LE, comfort_hi[i, t])
    var = {"slack_lo": slack_lo, "slack_hi": slack_hi,
           "h": np.array(asm.h_var), "t": np.array(asm.t_var),
           "loop": np.array(asm.loop_var), "outlet": np.array(asm.outlet_var),
           "t0": np.array(asm.t0_var)}
    return b.build(), var


def build_operation_milp(models: ModelBundle, measurements: dict,
                         forecasts: ForecastBundle, price: np.ndarray,
                         dr: DrProgram, delta_feas: tuple[np.ndarray, np.ndarray],
                         k: int, lam: int, mode: str, history: History,
                         comfort_lo: np.ndarray, comfort_hi: np.ndarray,
                         t0_bounds: tuple[float, float]) -> OperationProblem:
    """Cost-minimization MILP with comfort bounds widened by the feasibility slacks."""
    d_lo, d_hi = delta_feas
    if d_lo.shape != (0,) and d_lo.shape != comfort_lo.shape:
        raise ValueError("delta_feas shape does not match the comfort schedule")
    asm = _HorizonAssembler(models, measurements, forecasts, k, lam, mode,
                            history, comfort_lo, comfort_hi, t0_bounds)
    b = LpBuilder()
    asm.build_common(b)
    m = asm.m
    dev = models.devices
    price = np.asarray(price, dtype=float)
    if price.shape != (lam,):
        raise ValueError("price window must have length lam")

    # widened comfort as bounds on the zone temperature variables (t >= 1;
    # T(k) is measured and cannot be constrained)
    widen_lo = d_lo if d_lo.size else np.zeros((m, lam))
    widen_hi = d_hi if d_hi.size else np.zeros((m, lam))
    for t in range(1, lam):
        b.set_bounds(asm.t_var[t],
                     comfort_lo[:, t] - widen_lo[:, t] - _SLACK_PAD,
                     comfort_hi[:, t] + widen_hi[:, t] + _SLACK_PAD)

    # HP consumption, battery, PV and grid balance
    w_hp = b.add_vars(lam, lb=0.0, ub=np.inf)
    w_plus = b.add_vars(lam, lb=0.0, ub=dev.w_charge_max, cost=_BATTERY_REG)
    w_minus = b.add_vars(lam, lb=0.0, ub=dev.w_discharge_max, cost=_BATTERY_REG)
    e_var = b.add_vars(lam + 1, lb=0.0, ub=dev.e_max)
    e_meas = float(np.clip(measurements["e_ees"], 0.0, dev.e_max))
    b.set_bounds(e_var[0], e_meas, e_meas)
    # terminal salvage value: energy still stored at the horizon end is worth
    # the cheapest price in the window. Since eta * p_min < p_min, buying to
    # hold is never profitable, but draining the battery for near-zero valley
    # savings no longer pays either, so a reserve survives for price peaks.
    salvage = float(price.min())
    b.set_cost(e_var[lam], -salvage)
    pv_cap = models.pv.predict(forecasts.irradiance, forecasts.t_ambient)
    w_pv = b.add_vars(lam, lb=0.0, ub=pv_cap)
    w_grid = b.add_vars(lam, lb=0.0, ub=np.inf, cost=price)

    alpha = dev.alpha_hp_h if mode == "heating" else dev.alpha_hp_c
    sgn = 1.0 if mode == "heating" else -1.0
    for t in range(lam):
        # W_HP = alpha*(T0 - T_loop) heating; alpha*(T_in - T0) cooling
        b.add_row([w_hp[t], asm.t0_var[t], asm.loop_var[t]],
                  [1.0, -sgn * alpha, sgn * alpha], EQ, 0.0)
        b.add_row([e_var[t + 1], e_var[t], w_plus[t], w_minus[t]],
                  [1.0, -1.0, -dev.eta, 1.0 / dev.eta], EQ, 0.0)
        b.add_row([w_grid[t], w_hp[t], w_plus[t], w_minus[t], w_pv[t]],
                  [1.0, -1.0, -1.0, 1.0, 1.0], EQ, 0.0)

    # DR requests fully inside the horizon get one binary each
    dr_indices: list[int] = []
    eps_vars: list[int] = []
    mu_m = dev.big_m
    for j, r in dr.within(k, lam):
        eps = b.add_var(0.0, 1.0, cost=-r.reward)
        cols = [int(w_grid[l - k]) for l in range(r.start, r.end)] + [eps]
        vals = [1.0] * r.length + [mu_m * r.length - r.energy_bound]
        b.add_row(cols, vals, LE, mu_m * r.length)
        dr_indices.append(j)
        eps_vars.append(eps)

    var = {"h": np.array(asm.h_var), "t": np.array(asm.t_var),
           "loop": np.array(asm.loop_var), "outlet": np.array(asm.outlet_var),
           "t0": np.array(asm.t0_var), "w_hp": w_hp, "w_plus": w_plus,
           "w_minus": w_minus, "e": e_var, "w_pv": w_pv, "w": w_grid,
           "eps": np.array(eps_vars, dtype=np.int64)}
    milp = MilpSpec(lp=b.build(), binary_idx=np.array(eps_vars, dtype=np.int64))
    return OperationProblem(milp=milp, var=var, k=k, lam=lam, mode=mode,
                            dr_indices=dr_indices)


# ---------------------------------------------------------------------------
# Fan command recovery

def recover_fan_commands(h_star, t_snd, t_zone, gamma, v_max,
                         temp_tol: float = 0.1, h_tol: float = 1e-6) -> np.ndarray:
    """Invert the bilinear exchanger law: v* = h* / (gamma * (T_snd - T_zone)).

    Commands are clamped to [0, v_max]. A vanishing temperature difference
    with a nonzero heat request saturates the fan (with a warning).
    """
    h_star = np.atleast_1d(np.asarray(h_star, dtype=float))
    t_zone = np.atleast_1d(np.asarray(t_zone, dtype=float))
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), h_star.shape)
    v_max = np.broadcast_to(np.asarray(v_max, dtype=float), h_star.shape)
    v = np.zeros_like(h_star)
    for i in range(h_star.size):
        if abs(h_star[i]) <= h_tol:
            continue
        dt = t_snd - t_zone[i]
        if abs(dt) < temp_tol:
            log.warning("zone %d: |T_snd - T| = %.3f degC below tolerance with "
                        "h* = %.3f kW; saturating fan", i, abs(dt), h_star[i])
            v[i] = v_max[i]
            continue
        v[i] = h_star[i] / (gamma[i] * dt)
    return np.clip(v, 0.0, v_max)


def _dump_lp(lp: LinearProgram, k: int, tag: str) -> str:
    """Write the offending problem to a temp file for post-mortem inspection."""
    path = os.path.join(tempfile.gettempdir(), f"hvacmpc_{tag}_k{k}.lp")
    try:
        write_lp_text(lp, path)
    except OSError:
        return "<dump failed>"
    return path


# ---------------------------------------------------------------------------
# Controller

@dataclass
class MpcDiagnostics:
    objective: float
    slack_total: float
    eps: dict
    feas_time: float
    op_time: float
    plan: dict


class MpcController:
    """Receding-horizon controller executing the two-step strategy each step."""

    def __init__(self, models: ModelBundle, mode: str, lam: int = 72,
                 dr: DrProgram | None = None, backend: str = "auto",
                 t0_bounds: tuple[float, float] | None = None):
        self.models = models
        self.mode = mode
        self.lam = lam
        self.dr = dr or DrProgram()
        self.backend = backend
        dev = models.devices
        if t0_bounds is None:
            t0_bounds = ((0.0, dev.t0_max_heating) if mode == "heating"
                         else (dev.t0_min_cooling, 60.0))
        self.t0_bounds = t0_bounds
        depth = models.zone.spec.max_lag + 1
        self.history = History(depth)
        self._seeded = False

    def seed_history(self, measurements: dict, exo_row: np.ndarray):
        m = self.models.zone.n_zones
        loop_meas = (measurements["t_tes"] if self.mode == "heating"
                     else measurements["t_hp_c_in"])
        outlet_meas = (measurements["t_hp_h"] if self.mode == "heating"
                       else measurements["t_hp_c"])
        self.history.seed(measurements["t_zone"], np.zeros(m), exo_row,
                          loop_meas, outlet_meas)
        self._seeded = True

    def step(self, measurements: dict, forecasts: ForecastBundle,
             price: np.ndarray, k: int, comfort_lo: np.ndarray,
             comfort_hi: np.ndarray) -> tuple[StepDecision, MpcDiagnostics]:
        """Run Algorithm steps 2-6 and return the first decision of the plan."""
        if not self._seeded:
            self.seed_history(measurements, forecasts.exo_matrix()[0])
        lam = self.lam
        dev = self.models.devices

        t0 = time.perf_counter()
        feas_lp, feas_var = build_feasibility_lp(
            self.models, measurements, forecasts, k, lam, self.mode,
            self.history, comfort_lo, comfort_hi, self.t0_bounds)
        feas_res = solve_lp(feas_lp, self.backend)
        feas_time = time.perf_counter() - t0
        if not feas_res.is_optimal:
            raise RuntimeError(
                f"feasibility LP unexpectedly {feas_res.status} at step {k} "
                f"(dump: {_dump_lp(feas_lp, k, 'feasibility')})")
        d_lo = feas_res.x[feas_var["slack_lo"]]
        d_hi = feas_res.x[feas_var["slack_hi"]]

        t1 = time.perf_counter()
        op = build_operation_milp(
            self.models, measurements, forecasts, price, self.dr, (d_lo, d_hi),
            k, lam, self.mode, self.history, comfort_lo, comfort_hi,
            self.t0_bounds)
        op_res = solve_binary_milp(op.milp, self.backend)
        op_time = time.perf_counter() - t1
        if not op_res.is_optimal:
            raise RuntimeError(
                f"operation problem unexpectedly {op_res.status} at step {k} "
                f"(dump: {_dump_lp(op.milp.lp, k, 'operation')})")

        x = op_res.x
        h0 = x[op.var["h"][0]]
        t_snd_meas = (measurements["t_tes"] if self.mode == "heating"
                      else measurements["t_hp_c"])
        v = recover_fan_commands(h0, t_snd_meas, measurements["t_zone"],
                                 dev.gamma, dev.v_max)
        decision = StepDecision(
            v=v,
            t0=float(x[op.var["t0"][0]]),
            w_charge=float(max(x[op.var["w_plus"][0]], 0.0)),
            w_discharge=float(max(x[op.var["w_minus"][0]], 0.0)),
            w_pv=float(max(x[op.var["w_pv"][0]], 0.0)),
        )
        eps = {j: int(round(a)) for j, a in zip(op.dr_indices,
                                                op_res.binary_assignment)}
        plan = {name: x[idx] for name, idx in op.var.items() if np.size(idx)}
        diag = MpcDiagnostics(
            objective=float(op_res.objective),
            slack_total=float(feas_res.objective),
            eps=eps, feas_time=feas_time, op_time=op_time, plan=plan)

        # advance history with the realized heat command (exact under
        # noiseless measurement) and the measured exogenous row
        loop_meas = (measurements["t_tes"] if self.mode == "heating"
                     else measurements["t_hp_c_in"])
        outlet_meas = (measurements["t_hp_h"] if self.mode == "heating"
                       else measurements["t_hp_c"])
        h_applied = dev.gamma * (t_snd_meas - measurements["t_zone"]) * v
        self.history.push(measurements["t_zone"], h_applied,
                          forecasts.exo_matrix()[0], loop_meas, outlet_meas)
        return decision, diag
