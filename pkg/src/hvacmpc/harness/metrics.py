"""Metrics: cost/reward accounting and comfort-violation statistics.

All metrics are pure functions of a trajectory, so a report can always be
recomputed exactly from the dumped files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

from ..core import ComfortSchedule
from ..mpc import DrProgram, dr_settlement


@dataclass
class MetricsReport:
    cost_without_dr: float            # sum p(k) W(k) [EUR]
    dr_reward: float                  # earned rewards [EUR]
    overall_cost: float               # cost_without_dr - dr_reward
    dr_fulfilled: int
    dr_total: int
    energy_total: float               # sum W(k) [kWh]
    zone_avg_violation: list          # per-zone mean violation [degC]
    worst_zone_violation: float
    solve_time_mean: float
    solve_time_max: float
    n_steps: int

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def from_json(cls, path) -> "MetricsReport":
        with open(path) as fh:
            return cls(**json.load(fh))


def zone_violations(t_zone: np.ndarray, schedule: ComfortSchedule) -> np.ndarray:
    """Per-zone mean violation [degC]: mean_k max(0, lo - T, T - hi)."""
    t_zone = np.asarray(t_zone, dtype=float)     # (n, m)
    n, m = t_zone.shape
    lo = schedule.lower[:, :n].T
    hi = schedule.upper[:, :n].T
    viol = np.maximum.reduce([lo - t_zone, t_zone - hi, np.zeros_like(t_zone)])
    return viol.mean(axis=0)


def worst_zone_violation(t_zone: np.ndarray, schedule: ComfortSchedule) -> float:
    return float(zone_violations(t_zone, schedule).max())


def compute_report(t_zone: np.ndarray, w: np.ndarray, price: np.ndarray,
                   schedule: ComfortSchedule, dr: DrProgram,
                   solve_times: np.ndarray | None = None,
                   start_k: int = 0) -> MetricsReport:
    w = np.asarray(w, dtype=float)
    price = np.asarray(price, dtype=float)[:w.size]
    cost = float(price @ w)
    flags, reward, _ = dr_settlement(dr, w, start_k=start_k)
    zv = zone_violations(t_zone, schedule)
    st = np.asarray(solve_times, dtype=float) if solve_times is not None else np.zeros(1)
    return MetricsReport(
        cost_without_dr=cost,
        dr_reward=float(reward),
        overall_cost=cost - float(reward),
        dr_fulfilled=int(flags.sum()),
        dr_total=len(dr.requests),
        energy_total=float(w.sum()),
        zone_avg_violation=[float(x) for x in zv],
        worst_zone_violation=float(zv.max()),
        solve_time_mean=float(st.mean()),
        solve_time_max=float(st.max()),
        n_steps=int(w.size),
    )
