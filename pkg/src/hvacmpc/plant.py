"""Ground-truth building simulator.

A two-node RC network per zone (air + wall) with inter-zone coupling stands
in for the real building; it is deliberately richer than the controller's
regressive models so that closed-loop runs exhibit honest plant-model
mismatch. Thermal loops (TES / chilled water) are well-mixed tanks, the HP
outlet follows its setpoint with a one-step delay, and the battery follows
the efficiency-weighted charge balance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .core import DeviceParams, TimeGrid


def fan_heat_flow(gamma, t_snd, t_zone, v):
    """Heat conveyed by a fan coil [kW]: gamma * (T_send - T_zone) * v."""
    return gamma * (t_snd - t_zone) * v


def hp_energy(mode: str, t0: float, t_in: float, alpha: float) -> float:
    """Heat-pump electrical energy for one step [kWh].

    Heating consumes alpha*(T0 - T_in) and requires T0 >= T_in; cooling
    mirrors the sign. The pump is off (0) when setpoint equals inlet.
    """
    if mode == "heating":
        lift = t0 - t_in
    elif mode == "cooling":
        lift = t_in - t0
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if lift < 0:
        raise ValueError(
            f"{mode} setpoint violates the activation sign convention "
            f"(T0={t0}, T_in={t_in})")
    return alpha * lift


def ees_step(e: float, w_charge: float, w_discharge: float, eta: float) -> float:
    """Battery state of charge after one step: E + eta*W+ - W-/eta."""
    return e + eta * w_charge - w_discharge / eta


def pv_available(irradiance, t_ambient, theta_pv):
    """PVUSA available energy [kWh]: th1*I + th2*I^2 + th3*I*TA, clamped at 0."""
    irradiance = np.asarray(irradiance, dtype=float)
    raw = (theta_pv[0] * irradiance + theta_pv[1] * irradiance ** 2
           + theta_pv[2] * irradiance * t_ambient)
    return np.maximum(raw, 0.0)


@dataclass(frozen=True)
class Exogenous:
    """True exogenous drivers for one step."""

    t_ambient: float           # outdoor temperature [degC]
    irradiance: float          # global solar irradiance [W/m^2]
    gains: np.ndarray          # per-zone internal gains [kW]

    def __post_init__(self):
        object.__setattr__(self, "gains", np.atleast_1d(np.asarray(self.gains, dtype=float)))
        if self.irradiance < 0:
            raise ValueError("irradiance must be nonnegative")
        if np.any(self.gains < 0):
            raise ValueError("internal gains must be nonnegative")


@dataclass(frozen=True)
class StepDecision:
    """Per-step actuation commanded by a controller."""

    v: np.ndarray              # per-zone fan flow
    t0: float                  # HP outlet setpoint [degC]
    w_charge: float = 0.0      # battery charge [kWh]
    w_discharge: float = 0.0   # battery discharge [kWh]
    w_pv: float = 0.0          # PV draw request [kWh]

    def __post_init__(self):
        object.__setattr__(self, "v", np.atleast_1d(np.asarray(self.v, dtype=float)))
        if self.w_charge < -1e-12 or self.w_discharge < -1e-12 or self.w_pv < -1e-12:
            raise ValueError("battery/PV signals must be nonnegative")


@dataclass(frozen=True)
class EnergyLedger:
    """Electrical balance for one step; w = w_hp + w_ees - w_pv >= 0."""

    w_hp: float
    w_ees: float
    w_pv: float
    w: float


@dataclass
class PlantState:
    t_zone: np.ndarray         # zone air temperatures [degC]
    t_wall: np.ndarray         # hidden wall-node temperatures [degC]
    t_tes: float               # TES tank temperature [degC]
    t_hp_h: float              # heating HP outlet [degC]
    t_hp_c: float              # cooling HP outlet [degC]
    t_hp_c_in: float           # chilled loop return [degC]
    e_ees: float               # battery state of charge [kWh]

    def copy(self) -> "PlantState":
        return PlantState(self.t_zone.copy(), self.t_wall.copy(), self.t_tes,
                          self.t_hp_h, self.t_hp_c, self.t_hp_c_in, self.e_ees)


@dataclass(frozen=True)
class PlantParams:
    """RC-network and loop parameters of the synthetic building."""

    c_air: np.ndarray          # zone air capacitance [kWh/degC]
    c_wall: np.ndarray         # wall capacitance [kWh/degC]
    u_zone_wall: np.ndarray    # zone <-> wall conductance [kW/degC]
    u_wall_amb: np.ndarray     # wall <-> ambient conductance [kW/degC]
    u_zone_amb: np.ndarray     # zone <-> ambient (windows/infiltration) [kW/degC]
    adjacency: np.ndarray      # symmetric inter-zone conductances [kW/degC], zero diagonal
    solar_gain: np.ndarray     # effective solar aperture per zone [kW per kW/m^2]
    solar_to_air: float = 0.3  # fraction of solar gain entering the air node
    c_tes: float = 9.0         # TES capacitance [kWh/degC]
    k_tes: float = 15.0        # HP <-> TES exchange conductance [kW/degC]
    c_loop: float = 2.0        # chilled loop capacitance [kWh/degC]
    k_loop: float = 15.0       # HP <-> chilled loop exchange conductance [kW/degC]
    meas_noise_std: float = 0.0  # zone sensor noise std [degC], 0 disables

    def __post_init__(self):
        for name in ("c_air", "c_wall", "u_zone_wall", "u_wall_amb",
                     "u_zone_amb", "solar_gain"):
            arr = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            object.__setattr__(self, name, arr)
        adj = np.asarray(self.adjacency, dtype=float)
        object.__setattr__(self, "adjacency", adj)
        m = self.c_air.size
        if adj.shape != (m, m):
            raise ValueError("adjacency must be m x m")
        if not np.allclose(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(adj) != 0):
            raise ValueError("adjacency diagonal must be zero")
        if np.any(self.c_air <= 0) or np.any(self.c_wall <= 0):
            raise ValueError("capacitances must be strictly positive")

    @property
    def n_zones(self) -> int:
        return self.c_air.size


class Plant:
    """Discrete-time building plant with exact ZOH discretization of the RC part."""

    def __init__(self, params: PlantParams, devices: DeviceParams, grid: TimeGrid):
        if params.n_zones != devices.n_zones:
            raise ValueError("plant and device parameter zone counts differ")
        self.params = params
        self.devices = devices
        self.tau_h = grid.tau_h
        self._ad, self._bd = self._discretize()

    def _continuous_matrices(self):
        p = self.params
        m = p.n_zones
        a = np.zeros((2 * m, 2 * m))
        # inputs: [h (m), T_amb, irradiance(kW/m^2-scaled), gains (m)]
        b = np.zeros((2 * m, m + 2 + m))
        lap = np.diag(p.adjacency.sum(axis=1)) - p.adjacency
        inv_ca = 1.0 / p.c_air
        inv_cw = 1.0 / p.c_wall
        # zone air nodes
        a[:m, :m] = -inv_ca[:, None] * lap
        a[:m, :m] -= np.diag(inv_ca * (p.u_zone_wall + p.u_zone_amb))
        a[:m, m:] = np.diag(inv_ca * p.u_zone_wall)
        b[:m, :m] = np.diag(inv_ca)                              # fan heat
        b[:m, m] = inv_ca * p.u_zone_amb                          # ambient
        b[:m, m + 1] = inv_ca * p.solar_gain * p.solar_to_air     # solar (kW/m^2)
        b[:m, m + 2:] = np.diag(inv_ca)                           # internal gains
        # wall nodes
        a[m:, :m] = np.diag(inv_cw * p.u_zone_wall)
        a[m:, m:] = -np.diag(inv_cw * (p.u_zone_wall + p.u_wall_amb))
        b[m:, m] = inv_cw * p.u_wall_amb
        b[m:, m + 1] = inv_cw * p.solar_gain * (1.0 - p.solar_to_air)
        return a, b

    def _discretize(self):
        a, b = self._continuous_matrices()
        n, q = a.shape[0], b.shape[1]
        blk = np.zeros((n + q, n + q))
        blk[:n, :n] = a * self.tau_h
        blk[:n, n:] = b * self.tau_h
        eblk = expm(blk)
        return eblk[:n, :n], eblk[:n, n:]

    def initial_state(self, t_zone=20.0, t_tes=40.0, t_hp_c=12.0, e_ees=0.0) -> PlantState:
        m = self.params.n_zones
        tz = np.full(m, float(t_zone)) if np.isscalar(t_zone) else np.asarray(t_zone, float)
        return PlantState(t_zone=tz.copy(), t_wall=tz.copy(), t_tes=float(t_tes),
                          t_hp_h=float(t_tes), t_hp_c=float(t_hp_c),
                          t_hp_c_in=float(t_hp_c), e_ees=float(e_ees))

    def step(self, state: PlantState, u: StepDecision, e: Exogenous, mode: str,
             rng: np.random.Generator | None = None):
        """Advance one sampling period. Returns (new_state, ledger, measurements)."""
        p, dev = self.params, self.devices
        m = p.n_zones
        if mode not in ("heating", "cooling"):
            raise ValueError(f"unknown mode {mode!r}")
        for arr in (u.v, e.gains, state.t_zone, state.t_wall):
            if not np.all(np.isfinite(arr)):
                raise ValueError("NaN/inf in plant step inputs")
        if not np.isfinite(u.t0) or not np.isfinite(e.t_ambient):
            raise ValueError("NaN/inf in plant step inputs")

        v = np.clip(u.v, 0.0, dev.v_max)
        t_snd = state.t_tes if mode == "heating" else state.t_hp_c
        h = fan_heat_flow(dev.gamma, t_snd, state.t_zone, v)
        h_total = float(h.sum())

        # zone / wall dynamics (exact ZOH over the step)
        x = np.concatenate([state.t_zone, state.t_wall])
        uin = np.concatenate([h, [e.t_ambient, e.irradiance / 1000.0], e.gains])
        x_next = self._ad @ x + self._bd @ uin

        if mode == "heating":
            w_hp = dev.alpha_hp_h * max(u.t0 - state.t_tes, 0.0)
            t_hp_h_next = u.t0 if u.t0 >= state.t_tes else state.t_tes
            dq = p.k_tes * (state.t_hp_h - state.t_tes) - h_total
            t_tes_next = state.t_tes + self.tau_h * dq / p.c_tes
            t_hp_c_next, t_in_next = state.t_hp_c, state.t_hp_c_in
        else:
            w_hp = dev.alpha_hp_c * max(state.t_hp_c_in - u.t0, 0.0)
            t_hp_c_next = u.t0 if u.t0 <= state.t_hp_c_in else state.t_hp_c_in
            dq = p.k_loop * (state.t_hp_c - state.t_hp_c_in) - h_total
            t_in_next = state.t_hp_c_in + self.tau_h * dq / p.c_loop
            t_hp_h_next, t_tes_next = state.t_hp_h, state.t_tes

        w_plus = min(max(u.w_charge, 0.0), dev.w_charge_max)
        w_minus = min(max(u.w_discharge, 0.0), dev.w_discharge_max)
        # no export: discharge cannot exceed the load it serves
        w_minus = min(w_minus, w_hp + w_plus)
        e_next = ees_step(state.e_ees, w_plus, w_minus, dev.eta)
        if e_next < -1e-6 or e_next > dev.e_max + 1e-6:
            raise ValueError(
                f"battery capacity violation: E'={e_next:.6f} outside [0, {dev.e_max}]")
        e_next = float(np.clip(e_next, 0.0, dev.e_max))

        avail = float(pv_available(e.irradiance, e.t_ambient, dev.theta_pv))
        w_pv = min(max(u.w_pv, 0.0), avail)
        gross = w_hp + w_plus - w_minus
        w_pv = min(w_pv, max(gross, 0.0))  # no export to the grid
        w = gross - w_pv
        ledger = EnergyLedger(w_hp=w_hp, w_ees=w_plus - w_minus, w_pv=w_pv, w=w)

        new_state = PlantState(
            t_zone=x_next[:m], t_wall=x_next[m:], t_tes=t_tes_next,
            t_hp_h=t_hp_h_next, t_hp_c=t_hp_c_next, t_hp_c_in=t_in_next,
            e_ees=e_next)
        meas = self.measure(new_state, rng)
        return new_state, ledger, meas

    def measure(self, state: PlantState, rng: np.random.Generator | None = None) -> dict:
        """Sensor readings; zone channels get optional zero-mean Gaussian noise."""
        tz = state.t_zone.copy()
        if rng is not None and self.params.meas_noise_std > 0:
            tz = tz + rng.normal(0.0, self.params.meas_noise_std, size=tz.size)
        return {
            "t_zone": tz,
            "t_tes": state.t_tes,
            "t_hp_h": state.t_hp_h,
            "t_hp_c": state.t_hp_c,
            "t_hp_c_in": state.t_hp_c_in,
            "e_ees": state.e_ees,
        }
