"""Exogenous-input forecasts with synthetic AR(2) error paths.

Forecast errors grow with lead time: the raw AR(2) noise d is blended with a
ramp (l-k)/lambda so the forecast is exact at the current step (measured) and
degrades toward the horizon end. Temperature errors are additive, irradiance
errors multiplicative, internal-gain errors additive with saturation at 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Defaults calibrated offline (tools/calibrate_ar2.py): with these
# coefficients the 90th percentile of max|d| over a 72-step path is ~3 degC.
AR2_ALPHA1 = 1.4
AR2_ALPHA2 = -0.45
AR2_SIGMA = 0.2536


@dataclass
class Ar2Noise:
    """Second-order autoregressive error generator d(k) = a1 d(k-1) + a2 d(k-2) + eps."""

    alpha1: float = AR2_ALPHA1
    alpha2: float = AR2_ALPHA2
    sigma: float = AR2_SIGMA
    d1: float = 0.0  # d(k-1)
    d2: float = 0.0  # d(k-2)

    def __post_init__(self):
        # stability: roots of z^2 - a1 z - a2 inside the unit circle
        roots = np.roots([1.0, -self.alpha1, -self.alpha2])
        if np.any(np.abs(roots) >= 1.0):
            raise ValueError(
                f"unstable AR(2) coefficients ({self.alpha1}, {self.alpha2})")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")


def ar2_path(noise: Ar2Noise, n: int, rng: np.random.Generator) -> np.ndarray:
    """Sample d(0..n-1) continuing from the generator's stored state."""
    d = np.empty(n)
    d1, d2 = noise.d1, noise.d2
    eps = rng.normal(0.0, noise.sigma, size=n) if noise.sigma > 0 else np.zeros(n)
    for k in range(n):
        d[k] = noise.alpha1 * d1 + noise.alpha2 * d2 + eps[k]
        d2, d1 = d1, d[k]
    return d


def _ramp(n: int, lam: int) -> np.ndarray:
    return np.arange(n) / float(lam)


def temperature_forecast(t_true: np.ndarray, d: np.ndarray, k: int, lam: int) -> np.ndarray:
    """T_hat(l) = T_true(l) + d(l) * (l - k) / lambda over l = k..k+len-1."""
    t_true = np.asarray(t_true, dtype=float)
    d = np.asarray(d, dtype=float)
    if t_true.shape != d.shape:
        raise ValueError("series lengths must match")
    return t_true + d * _ramp(t_true.size, lam)


def irradiance_forecast(i_true: np.ndarray, d: np.ndarray, k: int, lam: int) -> np.ndarray:
    """I_hat(l) = I_true(l) * max(0, 1 + d(l)*(l-k)/lambda); never negative."""
    i_true = np.asarray(i_true, dtype=float)
    if np.any(i_true < 0):
        raise ValueError("irradiance must be nonnegative")
    factor = np.maximum(0.0, 1.0 + np.asarray(d, dtype=float) * _ramp(i_true.size, lam))
    return i_true * factor


def gains_forecast(g_true: np.ndarray, d: np.ndarray, k: int, lam: int) -> np.ndarray:
    """G_hat(l) = max(0, G_true(l) + d(l)*(l-k)/lambda); gains saturate at 0.

    g_true may be (n,) or (n, m); the same error path applies to every zone.
    """
    g_true = np.asarray(g_true, dtype=float)
    if np.any(g_true < 0):
        raise ValueError("gains must be nonnegative")
    d = np.asarray(d, dtype=float)
    ramped = d * _ramp(g_true.shape[0], lam)
    if g_true.ndim == 2:
        ramped = ramped[:, None]
    return np.maximum(0.0, g_true + ramped)


@dataclass(frozen=True)
class ForecastBundle:
    """Per-step exogenous forecasts over one horizon I(k, lambda)."""

    t_ambient: np.ndarray      # (lam,)
    irradiance: np.ndarray     # (lam,)
    gains: np.ndarray          # (lam, m)

    def __post_init__(self):
        if np.any(self.irradiance < 0) or np.any(self.gains < 0):
            raise ValueError("irradiance and gains forecasts must be nonnegative")

    @property
    def lam(self) -> int:
        return self.t_ambient.size

    def exo_matrix(self) -> np.ndarray:
        """Stacked exogenous regressors [TA, I, I^2, I*TA, G_1..G_m], shape (lam, 4+m)."""
        ta, irr = self.t_ambient, self.irradiance
        return np.column_stack([ta, irr, irr ** 2, irr * ta, self.gains])


def make_bundle(t_true, i_true, g_true, k: int, lam: int,
                rng: np.random.Generator | None = None,
                noise: Ar2Noise | None = None,
                sources=("temp", "irr", "gains")) -> ForecastBundle:
    """Blend fresh AR(2) error paths into the true inputs over one horizon.

    With rng=None (or an empty source list) the bundle equals the truth.
    Each enabled source draws an independent path.
    """
    t_true = np.asarray(t_true, dtype=float)
    i_true = np.asarray(i_true, dtype=float)
    g_true = np.atleast_2d(np.asarray(g_true, dtype=float))
    if g_true.shape[0] != lam:
        g_true = g_true.T
    if noise is None:
        noise = Ar2Noise()
    ta, irr, g = t_true.copy(), i_true.copy(), g_true.copy()
    if rng is not None:
        if "temp" in sources:
            ta = temperature_forecast(t_true, ar2_path(noise, lam, rng), k, lam)
        if "irr" in sources:
            irr = irradiance_forecast(i_true, ar2_path(noise, lam, rng), k, lam)
        if "gains" in sources:
            g = gains_forecast(g_true, ar2_path(noise, lam, rng), k, lam)
    return ForecastBundle(t_ambient=ta, irradiance=irr, gains=g)


def make_bundle_from_errors(t_true, i_true, g_true, k: int, lam: int,
                            errors: dict) -> ForecastBundle:
    """Blend pre-drawn error windows (one per source) into the true inputs.

    `errors` maps source names ("temp", "irr", "gains") to d windows of
    length lam. In a closed-loop uncertainty study the windows should be
    consecutive slices of one long error path, so that successive forecasts
    of the same instant update consistently: the lead ramp shrinks the same
    underlying error as the instant approaches, instead of replacing it with
    an independent draw every step.
    """
    t_true = np.asarray(t_true, dtype=float)
    i_true = np.asarray(i_true, dtype=float)
    g_true = np.atleast_2d(np.asarray(g_true, dtype=float))
    if g_true.shape[0] != lam:
        g_true = g_true.T
    ta, irr, g = t_true.copy(), i_true.copy(), g_true.copy()
    if "temp" in errors:
        ta = temperature_forecast(t_true, errors["temp"], k, lam)
    if "irr" in errors:
        irr = irradiance_forecast(i_true, errors["irr"], k, lam)
    if "gains" in errors:
        g = gains_forecast(g_true, errors["gains"], k, lam)
    return ForecastBundle(t_ambient=ta, irradiance=irr, gains=g)
