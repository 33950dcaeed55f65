"""Time grid, comfort schedules, device parameters and shared series types.

Conventions used throughout the package: temperature in degC, energy in kWh
per step, price in EUR/kWh, irradiance in W/m^2. Power is implicit through
the sampling period.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ZONE_CLASSES = ("commercial", "office", "residential")
MODES = ("heating", "cooling")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform discrete-time grid. Index k maps affinely to wall-clock time."""

    tau_s: float = 600.0  # sampling period [s]
    start: int = 0        # first discrete index
    steps: int = 1        # number of steps on the grid
    start_hour: float = 0.0  # wall-clock hour of day at index `start`

    def __post_init__(self):
        if self.tau_s <= 0:
            raise ValueError(f"tau_s must be positive, got {self.tau_s}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")

    @property
    def tau_h(self) -> float:
        """Step length in hours."""
        return self.tau_s / 3600.0

    @property
    def steps_per_day(self) -> float:
        return 86400.0 / self.tau_s

    def hour_of_day(self, k: int) -> float:
        """Wall-clock hour of day in [0, 24) for index k."""
        return (self.start_hour + (k - self.start) * self.tau_h) % 24.0

    def indices(self) -> np.ndarray:
        return np.arange(self.start, self.start + self.steps)


def interval(k: int, lam: int) -> np.ndarray:
    """Half-open index set {k, ..., k+lam-1}."""
    if lam < 1:
        raise ValueError(f"interval length must be >= 1, got {lam}")
    return np.arange(k, k + lam)


def intervals_disjoint(k1: int, lam1: int, k2: int, lam2: int) -> bool:
    return k1 + lam1 <= k2 or k2 + lam2 <= k1


# Comfort bound tables: per mode, per zone class, as (occupied_lo, occupied_hi,
# unoccupied_lo, unoccupied_hi) with the occupancy windows below.
_BOUNDS = {
    "heating": {
        "commercial": (20.0, 24.0, 15.0, 24.0),
        "office": (20.0, 24.0, 15.0, 24.0),
        "residential": (20.0, 24.0, 15.0, 24.0),
    },
    "cooling": {
        "commercial": (22.0, 24.0, 22.0, 28.0),
        "office": (22.0, 24.0, 22.0, 28.0),
        "residential": (22.0, 24.0, 22.0, 28.0),
    },
}


def _occupied(zone_class: str, hour: float) -> bool:
    if zone_class in ("commercial", "office"):
        return 8.0 <= hour < 18.0
    # residential: 7:00-9:00 and 19:00-01:00 (wraps midnight)
    return (7.0 <= hour < 9.0) or (hour >= 19.0) or (hour < 1.0)


def schedule_bounds(zone_class: str, hour: float, mode: str = "heating") -> tuple[float, float]:
    """Comfort band (lower, upper) for a zone class at a wall-clock hour."""
    if zone_class not in ZONE_CLASSES:
        raise ValueError(f"unknown zone class {zone_class!r}")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    occ_lo, occ_hi, un_lo, un_hi = _BOUNDS[mode][zone_class]
    if _occupied(zone_class, hour % 24.0):
        return occ_lo, occ_hi
    return un_lo, un_hi


@dataclass(frozen=True)
class ComfortSchedule:
    """Per-zone, per-step comfort bounds sampled on a time grid.

    lower/upper have shape (m, steps); lower <= upper everywhere.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 2:
            raise ValueError("lower/upper must be 2-d arrays of equal shape")
        if np.any(lo > hi):
            raise ValueError("comfort schedule has lower > upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def n_zones(self) -> int:
        return self.lower.shape[0]

    @property
    def n_steps(self) -> int:
        return self.lower.shape[1]

    def bounds_at(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        return self.lower[:, t], self.upper[:, t]

    @classmethod
    def from_classes(cls, zone_classes, grid: TimeGrid, mode: str = "heating",
                     lead_steps: int = 0) -> "ComfortSchedule":
        """Sample the class schedules on a grid.

        lead_steps shifts the schedule earlier (bounds take effect in advance);
        used by the thermostatic baseline for pre-conditioning.
        """
        m = len(zone_classes)
        lo = np.empty((m, grid.steps))
        hi = np.empty((m, grid.steps))
        for t, k in enumerate(grid.indices()):
            hour = grid.hour_of_day(k + lead_steps)
            for i, zc in enumerate(zone_classes):
                lo[i, t], hi[i, t] = schedule_bounds(zc, hour, mode)
        return cls(lo, hi)


@dataclass(frozen=True)
class DeviceParams:
    """HVAC, storage and PV device parameters shared by plant and controller."""

    gamma: np.ndarray          # per-zone fan-coil coefficient [kW/(degC * unit flow)]
    v_max: np.ndarray          # per-zone maximum fan flow [unit flow]
    alpha_hp_h: float          # heating HP consumption coefficient [kWh/degC per step]
    alpha_hp_c: float          # cooling HP consumption coefficient [kWh/degC per step]
    eta: float                 # battery charge/discharge efficiency, 0 < eta < 1
    e_max: float               # battery capacity [kWh]
    w_charge_max: float        # battery max charge per step [kWh]
    w_discharge_max: float     # battery max discharge per step [kWh]
    theta_pv: np.ndarray       # PVUSA coefficients (theta1, theta2, theta3)
    t0_max_heating: float = 55.0   # HP setpoint cap, heating [degC]
    t0_min_cooling: float = 5.0    # HP setpoint floor, cooling [degC]
    big_m: float = field(default=0.0)  # per-step consumption bound [kWh]; 0 -> derived

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        v = np.atleast_1d(np.asarray(self.v_max, dtype=float))
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "v_max", v)
        object.__setattr__(self, "theta_pv", np.asarray(self.theta_pv, dtype=float))
        if g.shape != v.shape:
            raise ValueError("gamma and v_max must have the same shape")
        if np.any(g <= 0) or np.any(v <= 0):
            raise ValueError("gamma and v_max must be strictly positive")
        if not (0.0 < self.eta < 1.0):
            raise ValueError(f"eta must be in (0,1), got {self.eta}")
        for name in ("alpha_hp_h", "alpha_hp_c", "e_max", "w_charge_max", "w_discharge_max"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.theta_pv.shape != (3,):
            raise ValueError("theta_pv must have exactly 3 coefficients")
        if self.big_m <= 0:
            object.__setattr__(self, "big_m", self.default_big_m())

    @property
    def n_zones(self) -> int:
        return self.gamma.size

    def default_big_m(self, loop_floor: float = 0.0, loop_ceil: float = 60.0) -> float:
        """Safe per-step consumption bound: max HP lift plus max battery charge."""
        lift_h = self.alpha_hp_h * max(self.t0_max_heating - loop_floor, 0.0)
        lift_c = self.alpha_hp_c * max(loop_ceil - self.t0_min_cooling, 0.0)
        return float(np.ceil(max(lift_h, lift_c) + self.w_charge_max))


@dataclass(frozen=True)
class PriceSeries:
    """Unit energy price per step [EUR/kWh]."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("prices must be finite and nonnegative")
        object.__setattr__(self, "p", p)

    def __len__(self) -> int:
        return self.p.size

    def window(self, k: int, lam: int) -> np.ndarray:
        if k + lam > self.p.size:
            raise IndexError("price series does not cover the requested window")
        return self.p[k:k + lam]
