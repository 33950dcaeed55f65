"""Least-squares identification of the controller's regressive models.

Zone temperatures follow a vector ARX over past temperatures, fan heat flows
and exogenous inputs; thermal loops (TES, chilled-water return) follow scalar
regressions over their own past, the HP outlet and the heat-flow vector; the
PV plant follows the PVUSA regression. All fits are plain least squares on an
estimation split, scored by the best-FIT index on a validation split.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


class IdentifiabilityError(ValueError):
    """Regressor matrix is rank deficient for the requested fit."""


# ---------------------------------------------------------------------------
# FIT index

def fit_index(y, y_hat) -> float:
    """Best-FIT index [%]: 100 * (1 - ||y - y_hat|| / ||y - mean(y)||)."""
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y.shape != y_hat.shape or y.size < 2:
        raise ValueError("series must have equal length >= 2")
    denom = np.linalg.norm(y - y.mean())
    if denom == 0.0:
        raise ValueError("FIT undefined for a constant reference series")
    return 100.0 * (1.0 - np.linalg.norm(y - y_hat) / denom)


# ---------------------------------------------------------------------------
# Regressor specification and layout

@dataclass(frozen=True)
class RegressorSpec:
    """Model orders and zone coupling structure.

    Order q means lags 0..q of the signal enter the regressor. `adjacency`
    is a boolean (m, m) matrix of geometric neighbors (symmetric, zero
    diagonal); zone i regresses on itself, its neighbors, its own heat flow
    and the shared exogenous columns plus its own gain column.
    """

    k_t: int = 1
    k_h: int = 1
    k_e: int = 1
    k_loop_state: int = 1   # own lags of T_TES / chilled return
    k_loop_outlet: int = 1  # lags of the HP outlet temperature
    k_loop_h: int = 1       # lags of the heat-flow vector
    adjacency: np.ndarray | None = None
    e_shared: int = 4       # leading exogenous columns common to all zones

    def __post_init__(self):
        for name in ("k_t", "k_h", "k_e", "k_loop_state", "k_loop_outlet", "k_loop_h"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.adjacency is not None:
            adj = np.asarray(self.adjacency, dtype=bool)
            if not np.array_equal(adj, adj.T) or np.any(np.diag(adj)):
                raise ValueError("adjacency must be symmetric with zero diagonal")
            object.__setattr__(self, "adjacency", adj)

    @property
    def max_lag(self) -> int:
        return max(self.k_t, self.k_h, self.k_e,
                   self.k_loop_state, self.k_loop_outlet, self.k_loop_h)


def _lagged_blocks(blocks):
    """Stack [x(k) ... x(k-order)] for each (array(n, w), order) block.

    Returns (phi, meta) where phi[t] is the regressor at time index
    t + max_order, and meta lists (block_index, lag, column) per phi column.
    """
    max_order = max(o for _, o in blocks)
    n = blocks[0][0].shape[0]
    cols, meta = [], []
    for b, (arr, order) in enumerate(blocks):
        arr = np.atleast_2d(np.asarray(arr, dtype=float).T).T  # (n, w)
        for lag in range(order + 1):
            sl = arr[max_order - lag:n - lag]
            cols.append(sl)
            meta.extend((b, lag, j) for j in range(arr.shape[1]))
    phi = np.hstack(cols)
    return phi, np.array(meta, dtype=np.int64)


def _solve_ls(phi: np.ndarray, y: np.ndarray, rel_tol: float = 1e-10) -> np.ndarray:
    """Column-equilibrated QR least squares with a rank check."""
    norms = np.linalg.norm(phi, axis=0)
    bad = np.nonzero(norms == 0.0)[0]
    if bad.size:
        raise IdentifiabilityError(f"zero regressor columns {bad.tolist()}")
    scaled = phi / norms
    q, r = np.linalg.qr(scaled)
    diag = np.abs(np.diag(r))
    deficient = np.nonzero(diag < rel_tol * diag.max())[0]
    if deficient.size:
        raise IdentifiabilityError(
            f"rank-deficient regressor, offending columns {deficient.tolist()}")
    theta = np.linalg.solve(r, q.T @ y)
    return theta / norms


# ---------------------------------------------------------------------------
# Models

@dataclass
class ZoneArxModel:
    """T(k+1) = Theta Phi(k) with per-row neighbor sparsity.

    theta has shape (m, width); meta maps each column to (block, lag, idx)
    with block 0 = temperatures, 1 = heat flows, 2 = exogenous.
    """

    theta: np.ndarray
    meta: np.ndarray
    spec: RegressorSpec
    n_zones: int
    n_exo: int
    diagnostics: dict = field(default_factory=dict)

    def regressor(self, t_hist, h_hist, e_hist) -> np.ndarray:
        """Regressor at the newest time in the histories (lag 0 = last row)."""
        parts = []
        for (hist, order) in ((t_hist, self.spec.k_t), (h_hist, self.spec.k_h),
                              (e_hist, self.spec.k_e)):
            hist = np.atleast_2d(np.asarray(hist, dtype=float))
            for lag in range(order + 1):
                parts.append(hist[-1 - lag])
        return np.concatenate(parts)

    def predict(self, t_hist, h_hist, e_hist) -> np.ndarray:
        return self.theta @ self.regressor(t_hist, h_hist, e_hist)


@dataclass
class LoopArxModel:
    """Scalar loop temperature regression: x(k+1) = theta . phi(k)."""

    theta: np.ndarray
    meta: np.ndarray
    spec: RegressorSpec
    n_zones: int
    diagnostics: dict = field(default_factory=dict)

    def regressor(self, state_hist, outlet_hist, h_hist) -> np.ndarray:
        parts = []
        for hist, order in ((np.atleast_2d(np.asarray(state_hist, float).reshape(-1, 1)),
                             self.spec.k_loop_state),
                            (np.atleast_2d(np.asarray(outlet_hist, float).reshape(-1, 1)),
                             self.spec.k_loop_outlet),
                            (np.atleast_2d(np.asarray(h_hist, float)),
                             self.spec.k_loop_h)):
            for lag in range(order + 1):
                parts.append(hist[-1 - lag])
        return np.concatenate(parts)

    def predict(self, state_hist, outlet_hist, h_hist) -> float:
        return float(self.theta @ self.regressor(state_hist, outlet_hist, h_hist))


@dataclass
class PvusaModel:
    """Static PVUSA fit: available PV energy over [I, I^2, I*TA]."""

    theta: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def predict(self, irradiance, t_ambient) -> np.ndarray:
        irradiance = np.asarray(irradiance, dtype=float)
        raw = (self.theta[0] * irradiance + self.theta[1] * irradiance ** 2
               + self.theta[2] * irradiance * np.asarray(t_ambient, dtype=float))
        return np.maximum(raw, 0.0)


# ---------------------------------------------------------------------------
# Fitting

def _split(n: int, est_fraction: float) -> int:
    n_est = int(round(n * est_fraction))
    return min(max(n_est, 2), n - 1)


def _zone_mask(spec: RegressorSpec, meta: np.ndarray, zone: int, m: int,
               n_exo: int) -> np.ndarray:
    """Column mask for one zone row under the neighbor sparsity rule."""
    adj = spec.adjacency
    mask = np.zeros(meta.shape[0], dtype=bool)
    for c, (blk, _lag, idx) in enumerate(meta):
        if blk == 0:  # temperatures
            mask[c] = idx == zone or (adj is not None and adj[zone, idx]) or adj is None
        elif blk == 1:  # heat flows: own zone only
            mask[c] = idx == zone
        else:  # exogenous: shared columns plus own per-zone column
            if n_exo <= spec.e_shared:
                mask[c] = True
            else:
                mask[c] = idx < spec.e_shared or idx == spec.e_shared + zone
    return mask


def fit_arx(dataset: dict, spec: RegressorSpec, target: str = "zone",
            est_fraction: float = 14.0 / 18.0):
    """Least-squares ARX fit on the estimation split of `dataset`.

    target 'zone' needs keys t (n, m), h (n, m), e (n, n_exo);
    targets 'tes'/'cooling' need state (n,), outlet (n,), h (n, m).
    """
    if target == "zone":
        t = np.asarray(dataset["t"], dtype=float)
        h = np.asarray(dataset["h"], dtype=float)
        e = np.asarray(dataset["e"], dtype=float)
        n, m = t.shape
        n_exo = e.shape[1]
        max_order = max(spec.k_t, spec.k_h, spec.k_e)
        if n <= max_order + m + n_exo:
            raise ValueError("dataset shorter than the regressor width")
        n_est = _split(n, est_fraction)
        phi, meta = _lagged_blocks([(t[:n_est], spec.k_t), (h[:n_est], spec.k_h),
                                    (e[:n_est], spec.k_e)])
        # phi rows cover times max_order..n_est-1; pair row at time k with T(k+1)
        phi = phi[:-1]
        y = t[max_order + 1:n_est]
        theta = np.zeros((m, phi.shape[1]))
        for i in range(m):
            mask = _zone_mask(spec, meta, i, m, n_exo)
            theta[i, mask] = _solve_ls(phi[:, mask], y[:, i])
        model = ZoneArxModel(theta=theta, meta=meta, spec=spec, n_zones=m,
                             n_exo=n_exo)
        model.diagnostics = _validate_zone(model, t, h, e, n_est)
        return model

    if target in ("tes", "cooling"):
        state = np.asarray(dataset["state"], dtype=float)
        outlet = np.asarray(dataset["outlet"], dtype=float)
        h = np.atleast_2d(np.asarray(dataset["h"], dtype=float))
        if h.shape[0] != state.shape[0]:
            h = h.T
        n = state.size
        max_order = max(spec.k_loop_state, spec.k_loop_outlet, spec.k_loop_h)
        n_est = _split(n, est_fraction)
        phi, meta = _lagged_blocks([
            (state[:n_est, None], spec.k_loop_state),
            (outlet[:n_est, None], spec.k_loop_outlet),
            (h[:n_est], spec.k_loop_h)])
        phi = phi[:-1]
        y = state[max_order + 1:n_est]
        theta = _solve_ls(phi, y)
        model = LoopArxModel(theta=theta, meta=meta, spec=spec, n_zones=h.shape[1])
        model.diagnostics = _validate_loop(model, state, outlet, h, n_est)
        return model

    raise ValueError(f"unknown fit target {target!r}")


def _validate_zone(model: ZoneArxModel, t, h, e, n_est) -> dict:
    max_order = max(model.spec.k_t, model.spec.k_h, model.spec.k_e)
    lead = max_order + 1
    if t.shape[0] - n_est < lead + 2:
        return {"fit_1step": None}
    pred = simulate_arx(model, {"t": t[:n_est], "h": h[:n_est], "e": e[:n_est]},
                        {"h": h[n_est:], "e": e[n_est:]},
                        t.shape[0] - n_est, one_step_truth=t[n_est:])
    fits = []
    for i in range(t.shape[1]):
        try:
            fits.append(fit_index(t[n_est:, i], pred[:, i]))
        except ValueError:
            fits.append(np.nan)
    return {"fit_1step": float(np.nanmean(fits)), "n_est": int(n_est)}


def _validate_loop(model: LoopArxModel, state, outlet, h, n_est) -> dict:
    n_val = state.size - n_est
    if n_val < 3:
        return {"fit_1step": None}
    preds = np.empty(n_val)
    for t in range(n_val):
        idx = n_est + t
        preds[t] = model.predict(state[:idx + 1], outlet[:idx + 1], h[:idx + 1])
    try:
        fit = fit_index(state[n_est + 1:], preds[:-1])
    except ValueError:
        fit = np.nan
    return {"fit_1step": float(fit), "n_est": int(n_est)}


def simulate_arx(model: ZoneArxModel, history: dict, future: dict, n: int,
                 one_step_truth=None) -> np.ndarray:
    """Iterate the zone model n steps, feeding back its own predictions.

    history: past t/h/e arrays (last row = time k-1); future: h/e over the
    simulated window (row t = time k+t). When one_step_truth is given, the
    temperature fed back is replaced by the measured value (pure one-step
    prediction).
    """
    t_hist = [row for row in np.atleast_2d(np.asarray(history["t"], float))]
    h_hist = [row for row in np.atleast_2d(np.asarray(history["h"], float))]
    e_hist = [row for row in np.atleast_2d(np.asarray(history["e"], float))]
    max_order = max(model.spec.k_t, model.spec.k_h, model.spec.k_e)
    if min(len(t_hist), len(h_hist), len(e_hist)) < max_order + 1:
        raise ValueError("insufficient history to fill the regressor")
    h_fut = np.atleast_2d(np.asarray(future["h"], float))
    e_fut = np.atleast_2d(np.asarray(future["e"], float))
    out = np.empty((n, model.n_zones))
    for t in range(n):
        # last history rows are time k+t-1, so this predicts T(k+t)
        pred = model.predict(np.array(t_hist), np.array(h_hist), np.array(e_hist))
        out[t] = pred
        if one_step_truth is not None:
            t_hist.append(np.asarray(one_step_truth[t], dtype=float))
        else:
            t_hist.append(pred)
        if t < n - 1:
            h_hist.append(h_fut[t])
            e_hist.append(e_fut[t])
    return out


def fit_pvusa(irradiance, t_ambient, w_pv) -> PvusaModel:
    """Least-squares PVUSA fit on regressors [I, I^2, I*TA]."""
    irr = np.asarray(irradiance, dtype=float)
    ta = np.asarray(t_ambient, dtype=float)
    w = np.asarray(w_pv, dtype=float)
    if np.unique(irr).size < 3:
        raise IdentifiabilityError("need at least 3 distinct irradiance values")
    phi = np.column_stack([irr, irr ** 2, irr * ta])
    theta = _solve_ls(phi, w)
    resid = w - phi @ theta
    return PvusaModel(theta=theta,
                      diagnostics={"residual_rms": float(np.sqrt(np.mean(resid ** 2)))})


# ---------------------------------------------------------------------------
# Serialization

def save_models(path, zone: ZoneArxModel, loop: LoopArxModel | None,
                pv: PvusaModel | None) -> None:
    doc = {
        "zone": {
            "theta": zone.theta.tolist(),
            "meta": zone.meta.tolist(),
            "orders": [zone.spec.k_t, zone.spec.k_h, zone.spec.k_e],
            "n_zones": zone.n_zones,
            "n_exo": zone.n_exo,
            "e_shared": zone.spec.e_shared,
            "adjacency": None if zone.spec.adjacency is None
            else zone.spec.adjacency.astype(int).tolist(),
            "diagnostics": zone.diagnostics,
        },
    }
    if loop is not None:
        doc["loop"] = {
            "theta": loop.theta.tolist(),
            "meta": loop.meta.tolist(),
            "orders": [loop.spec.k_loop_state, loop.spec.k_loop_outlet, loop.spec.k_loop_h],
            "n_zones": loop.n_zones,
            "diagnostics": loop.diagnostics,
        }
    if pv is not None:
        doc["pv"] = {"theta": pv.theta.tolist(), "diagnostics": pv.diagnostics}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_models(path):
    with open(path) as fh:
        doc = json.load(fh)
    z = doc["zone"]
    adj = None if z["adjacency"] is None else np.array(z["adjacency"], dtype=bool)
    lo = doc.get("loop")
    loop_orders = lo["orders"] if lo else [1, 1, 1]
    spec = RegressorSpec(k_t=z["orders"][0], k_h=z["orders"][1], k_e=z["orders"][2],
                         k_loop_state=loop_orders[0], k_loop_outlet=loop_orders[1],
                         k_loop_h=loop_orders[2], adjacency=adj,
                         e_shared=z["e_shared"])
    zone = ZoneArxModel(theta=np.array(z["theta"]), meta=np.array(z["meta"]),
                        spec=spec, n_zones=z["n_zones"], n_exo=z["n_exo"],
                        diagnostics=z.get("diagnostics", {}))
    loop = None
    if lo:
        loop = LoopArxModel(theta=np.array(lo["theta"]), meta=np.array(lo["meta"]),
                            spec=spec, n_zones=lo["n_zones"],
                            diagnostics=lo.get("diagnostics", {}))
    pv = None
    if "pv" in doc:
        pv = PvusaModel(theta=np.array(doc["pv"]["theta"]),
                        diagnostics=doc["pv"].get("diagnostics", {}))
    return zone, loop, pv
