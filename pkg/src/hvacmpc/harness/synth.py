"""Synthetic scenario ingredients: weather, prices, gains, plant parameters.

Real weather and market data are out of scope; these generators produce
3-day-style scenarios with the right qualitative texture (diurnal cycles,
morning/evening price peaks, occupancy-driven internal gains).
"""

from __future__ import annotations

import numpy as np

from ..core import ZONE_CLASSES, DeviceParams, TimeGrid
from .. import plant as plant_mod

# seasonal weather presets: (mean TA, diurnal amplitude, peak irradiance W/m^2)
_WEATHER = {"heating": (4.0, 4.0, 450.0), "cooling": (27.0, 5.0, 900.0)}


def diurnal_weather(grid: TimeGrid, mode: str, rng: np.random.Generator | None = None,
                    noise_std: float = 0.6):
    """Sinusoidal ambient temperature and a clipped solar bell, plus AR(1) noise.

    Returns (t_ambient, irradiance), each of length grid.steps.
    """
    mean, amp, i_peak = _WEATHER[mode]
    hours = np.array([grid.hour_of_day(k) for k in grid.indices()])
    # temperature minimum at ~05:00, maximum at ~17:00
    ta = mean + amp * np.sin(2.0 * np.pi * (hours - 11.0) / 24.0)
    # solar bell between 08:00 and 17:00
    irr = i_peak * np.maximum(0.0, np.sin(np.pi * (hours - 8.0) / 9.0))
    irr[(hours < 8.0) | (hours > 17.0)] = 0.0
    if rng is not None and noise_std > 0:
        n = grid.steps
        ar = np.empty(n)
        prev = 0.0
        eps = rng.normal(0.0, noise_std * np.sqrt(1 - 0.9 ** 2), size=n)
        for t in range(n):
            prev = 0.9 * prev + eps[t]
            ar[t] = prev
        ta = ta + ar
        irr = np.maximum(0.0, irr * (1.0 + 0.1 * ar))
    return ta, irr


def two_peak_price(grid: TimeGrid, base: float = 0.06, peak: float = 0.22) -> np.ndarray:
    """Day-ahead-style price with morning and evening peaks [EUR/kWh]."""
    hours = np.array([grid.hour_of_day(k) for k in grid.indices()])
    p = np.full(grid.steps, base)
    p += (peak - base) * np.exp(-0.5 * ((hours - 8.5) / 1.5) ** 2)
    p += (peak - base) * np.exp(-0.5 * ((hours - 19.5) / 1.8) ** 2)
    return p


def internal_gains(zone_classes, grid: TimeGrid, rng: np.random.Generator | None = None,
                   level: float = 0.4) -> np.ndarray:
    """Occupancy-driven per-zone gains [kW], shape (steps, m)."""
    from ..core import _occupied  # occupancy windows shared with the schedules
    m = len(zone_classes)
    g = np.zeros((grid.steps, m))
    for t, k in enumerate(grid.indices()):
        hour = grid.hour_of_day(k)
        for i, zc in enumerate(zone_classes):
            if _occupied(zc, hour):
                g[t, i] = level
    if rng is not None:
        g *= np.maximum(0.0, 1.0 + 0.15 * rng.standard_normal(g.shape))
    return g


def default_zone_classes(m: int) -> list[str]:
    return [ZONE_CLASSES[i % len(ZONE_CLASSES)] for i in range(m)]


def chain_adjacency(m: int, conductance: float = 0.05) -> np.ndarray:
    """Zones coupled along a corridor chain."""
    adj = np.zeros((m, m))
    for i in range(m - 1):
        adj[i, i + 1] = adj[i + 1, i] = conductance
    return adj


def default_plant_params(m: int, meas_noise_std: float = 0.0) -> plant_mod.PlantParams:
    """Desk-scale building: moderately heavy zones on a corridor chain."""
    return plant_mod.PlantParams(
        c_air=np.full(m, 1.5),          # kWh/degC (air + furniture)
        c_wall=np.full(m, 8.0),
        u_zone_wall=np.full(m, 0.30),   # kW/degC
        u_wall_amb=np.full(m, 0.08),
        u_zone_amb=np.full(m, 0.06),    # windows/infiltration
        adjacency=chain_adjacency(m),
        solar_gain=np.full(m, 2.0),     # kW per kW/m^2
        c_tes=2.0 + 0.35 * m,           # tank grows with the building
        k_tes=1.5 * m,
        c_loop=1.0 + 0.10 * m,
        k_loop=1.5 * m,
        meas_noise_std=meas_noise_std,
    )


def default_device_params(m: int) -> DeviceParams:
    """Fan-coils sized for ~5 kW per zone at design lift, HP/storage to match."""
    pv_scale = m / 20.0   # ~10 kW plant at 20 zones
    return DeviceParams(
        gamma=np.full(m, 0.08),        # kW/(degC * unit flow)
        v_max=np.full(m, 2.5),
        alpha_hp_h=0.02 * m,           # kWh/degC lift per step
        alpha_hp_c=0.02 * m,
        eta=0.92,
        e_max=1.0 * m,                 # kWh
        w_charge_max=0.15 * m,         # kWh per step
        w_discharge_max=0.15 * m,
        theta_pv=pv_scale * np.array([1.2e-3, 2.0e-7, 8.0e-6]),
    )


def prbs(n: int, m: int, rng: np.random.Generator, hold: int = 6) -> np.ndarray:
    """Pseudo-random binary excitation in [0, 1], held `hold` steps, shape (n, m)."""
    n_blocks = n // hold + 1
    levels = rng.integers(0, 2, size=(n_blocks, m)).astype(float)
    return np.repeat(levels, hold, axis=0)[:n]
