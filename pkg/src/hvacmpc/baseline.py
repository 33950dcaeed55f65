"""Rule-based thermostatic controller used as the comparison baseline.

Per-zone bang-bang fans with hysteresis around the active comfort bound, a
fixed supply setpoint with tank deadband logic, PV surplus routed into the
battery, battery discharged before drawing from the grid, and no awareness
of prices or demand-response requests. Pre-conditioning is obtained by
feeding the controller a comfort schedule shifted earlier in time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DeviceParams
from .forecast import ForecastBundle
from .plant import StepDecision, pv_available

# hysteresis half-width [degC]; fans latch on within `hyst` of the bound and
# release at 3*hyst past it
HYSTERESIS = 0.5
SUPPLY_SETPOINT_HEATING = 45.0   # TES target [degC]
SUPPLY_SETPOINT_COOLING = 7.0    # chilled supply target [degC]
TANK_DEADBAND = 2.0              # tank recharge deadband [degC]


@dataclass
class BaselineDiagnostics:
    fans_on: np.ndarray
    pump_on: bool
    w_hp_est: float


class BaselineController:
    """Thermostat + deadband logic sharing the MPC controller's step interface."""

    def __init__(self, devices: DeviceParams, mode: str,
                 hysteresis: float = HYSTERESIS):
        if mode not in ("heating", "cooling"):
            raise ValueError(f"unknown mode {mode!r}")
        self.devices = devices
        self.mode = mode
        self.hyst = hysteresis
        self._fan_on = np.zeros(devices.n_zones, dtype=bool)
        self._pump_on = False

    def _fan_logic(self, t_zone, lo, hi) -> np.ndarray:
        on = self._fan_on
        if self.mode == "heating":
            on = np.where(t_zone < lo + self.hyst, True, on)
            on = np.where(t_zone > lo + 3.0 * self.hyst, False, on)
        else:
            on = np.where(t_zone > hi - self.hyst, True, on)
            on = np.where(t_zone < hi - 3.0 * self.hyst, False, on)
        self._fan_on = on.astype(bool)
        return self._fan_on

    def _pump_logic(self, loop_temp: float) -> float:
        """Tank recharge with deadband; returns the HP setpoint T0."""
        if self.mode == "heating":
            set_pt = SUPPLY_SETPOINT_HEATING
            if loop_temp < set_pt - TANK_DEADBAND:
                self._pump_on = True
            elif loop_temp >= set_pt:
                self._pump_on = False
            # activation requires T0 >= T_TES; idle at the tank temperature
            return set_pt if self._pump_on else max(loop_temp, 0.0)
        set_pt = SUPPLY_SETPOINT_COOLING
        if loop_temp > set_pt + TANK_DEADBAND:
            self._pump_on = True
        elif loop_temp <= set_pt:
            self._pump_on = False
        return set_pt if self._pump_on else loop_temp

    def step(self, measurements: dict, forecasts: ForecastBundle,
             price: np.ndarray, k: int, comfort_lo: np.ndarray,
             comfort_hi: np.ndarray) -> tuple[StepDecision, BaselineDiagnostics]:
        """Rule evaluation at step k. Only the first forecast row (the current,
        exact exogenous sample) and the first comfort column are used."""
        dev = self.devices
        t_zone = np.asarray(measurements["t_zone"], dtype=float)
        lo = np.asarray(comfort_lo, dtype=float)
        hi = np.asarray(comfort_hi, dtype=float)
        if lo.ndim == 2:
            lo, hi = lo[:, 0], hi[:, 0]

        on = self._fan_logic(t_zone, lo, hi)
        v = np.where(on, dev.v_max, 0.0)

        if self.mode == "heating":
            loop_temp = float(measurements["t_tes"])
            t0 = self._pump_logic(loop_temp)
            w_hp = dev.alpha_hp_h * max(t0 - loop_temp, 0.0)
        else:
            loop_temp = float(measurements["t_hp_c_in"])
            t0 = self._pump_logic(loop_temp)
            w_hp = dev.alpha_hp_c * max(loop_temp - t0, 0.0)

        # PV first, surplus into the battery, battery before the grid
        avail = float(pv_available(forecasts.irradiance[0],
                                   forecasts.t_ambient[0], dev.theta_pv))
        e = float(np.clip(measurements["e_ees"], 0.0, dev.e_max))
        surplus = max(avail - w_hp, 0.0)
        w_charge = min(surplus, dev.w_charge_max, (dev.e_max - e) / dev.eta)
        deficit = max(w_hp - avail, 0.0)
        w_discharge = min(deficit, dev.w_discharge_max, e * dev.eta)
        w_pv = min(avail, w_hp + w_charge - w_discharge)

        decision = StepDecision(v=v, t0=t0, w_charge=w_charge,
                                w_discharge=w_discharge, w_pv=max(w_pv, 0.0))
        return decision, BaselineDiagnostics(fans_on=on.copy(),
                                             pump_on=self._pump_on,
                                             w_hp_est=w_hp)
