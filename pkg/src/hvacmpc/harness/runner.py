"""Experiment runners: identification, closed loop, comparison, Monte-Carlo.

All randomness flows from the config seed through named substreams, so every
table is reproducible and Monte-Carlo realizations are order-independent.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..baseline import BaselineController
from ..core import ComfortSchedule, DeviceParams, TimeGrid
from ..forecast import Ar2Noise, ar2_path, make_bundle, make_bundle_from_errors
from ..mpc import DrProgram, DrRequest, ModelBundle, MpcController
from ..plant import Exogenous, Plant, PlantParams, StepDecision, pv_available
from ..sysid import RegressorSpec, fit_arx, fit_pvusa
from .config import ExperimentConfig, seed_streams
from .metrics import MetricsReport, compute_report
from . import synth

_STREAMS = ("weather", "gains", "ident", "plant-noise", "forecast")


@dataclass
class Scenario:
    """Everything a closed-loop run needs, generated from one config."""

    cfg: ExperimentConfig
    grid: TimeGrid                 # extended by lam steps past the run window
    zone_classes: list
    plant_params: PlantParams
    devices: DeviceParams
    t_ambient: np.ndarray          # (n_run + lam,)
    irradiance: np.ndarray
    gains: np.ndarray              # (n_run + lam, m)
    price: np.ndarray
    schedule: ComfortSchedule      # (m, n_run + lam)
    schedule_lead: ComfortSchedule
    dr: DrProgram

    @property
    def n_run(self) -> int:
        return self.cfg.n_steps


def build_scenario(cfg: ExperimentConfig) -> Scenario:
    m = cfg.n_zones
    classes = list(cfg.zone_classes) or synth.default_zone_classes(m)
    streams = seed_streams(cfg.seed, _STREAMS)
    n_ext = cfg.n_steps + cfg.lam
    grid = TimeGrid(tau_s=cfg.tau_s, start=0, steps=n_ext, start_hour=cfg.start_hour)
    ta, irr = synth.diurnal_weather(grid, cfg.mode, streams["weather"])
    gains = synth.internal_gains(classes, grid, streams["gains"])
    price = synth.two_peak_price(grid, cfg.price_base, cfg.price_peak)
    lead = int(round(cfg.preconditioning_lead_h * 3600.0 / cfg.tau_s))
    schedule = ComfortSchedule.from_classes(classes, grid, cfg.mode)
    schedule_lead = ComfortSchedule.from_classes(classes, grid, cfg.mode,
                                                 lead_steps=lead)
    dr = DrProgram(tuple(DrRequest(r["start"], r["length"], r["energy_bound"],
                                   r["reward"]) for r in cfg.dr_requests))
    return Scenario(cfg=cfg, grid=grid, zone_classes=classes,
                    plant_params=synth.default_plant_params(m, cfg.meas_noise_std),
                    devices=synth.default_device_params(m),
                    t_ambient=ta, irradiance=irr, gains=gains, price=price,
                    schedule=schedule, schedule_lead=schedule_lead, dr=dr)


# ---------------------------------------------------------------------------
# Identification campaign

def identify(scenario: Scenario) -> ModelBundle:
    """Open-loop excitation run on the plant, then least-squares fits."""
    cfg = scenario.cfg
    m = cfg.n_zones
    rng = seed_streams(cfg.seed, _STREAMS)["ident"]
    n_id = int(round(cfg.identification_days * 86400.0 / cfg.tau_s))
    grid = TimeGrid(tau_s=cfg.tau_s, start=0, steps=n_id, start_hour=cfg.start_hour)
    ta, irr = synth.diurnal_weather(grid, cfg.mode, rng)
    gains = synth.internal_gains(scenario.zone_classes, grid, rng)
    plant = Plant(scenario.plant_params, scenario.devices, grid)
    dev = scenario.devices
    heating = cfg.mode == "heating"
    state = plant.initial_state(t_zone=20.0 if heating else 25.0)

    v_exc = dev.v_max * (0.2 + 0.8 * synth.prbs(n_id, m, rng))
    t0_exc = synth.prbs(n_id, 1, rng, hold=9)[:, 0]
    t_rows, h_rows, e_rows = [], [], []
    loop_state, loop_outlet = [], []
    for k in range(n_id):
        meas = plant.measure(state, rng if scenario.plant_params.meas_noise_std else None)
        if heating:
            snd, lstate, loutlet = state.t_tes, meas["t_tes"], meas["t_hp_h"]
            # absolute setpoint excitation; the pump idles when T0 < T_TES
            t0 = 38.0 + 14.0 * t0_exc[k]
        else:
            snd, lstate, loutlet = state.t_hp_c, meas["t_hp_c_in"], meas["t_hp_c"]
            t0 = 6.0 + 8.0 * (1.0 - t0_exc[k])
        h = dev.gamma * (snd - meas["t_zone"]) * v_exc[k]
        e_row = np.concatenate([[ta[k], irr[k], irr[k] ** 2, irr[k] * ta[k]],
                                gains[k]])
        t_rows.append(meas["t_zone"])
        h_rows.append(h)
        e_rows.append(e_row)
        loop_state.append(lstate)
        loop_outlet.append(loutlet)
        u = StepDecision(v=v_exc[k], t0=float(t0))
        state, _, _ = plant.step(state, u, Exogenous(ta[k], irr[k], gains[k]),
                                 cfg.mode)

    adjacency = scenario.plant_params.adjacency > 0
    # loop orders 0: the tank is first order, so lagged loop regressors are
    # exactly collinear on noiseless data
    spec = RegressorSpec(k_t=1, k_h=1, k_e=1, adjacency=adjacency,
                         k_loop_state=0, k_loop_outlet=0, k_loop_h=0)
    dataset = {"t": np.array(t_rows), "h": np.array(h_rows), "e": np.array(e_rows)}
    zone = fit_arx(dataset, spec, target="zone")
    loop = fit_arx({"state": np.array(loop_state), "outlet": np.array(loop_outlet),
                    "h": np.array(h_rows)}, spec,
                   target="tes" if heating else "cooling")
    # PVUSA fit on noisy observations of the true PV curve
    w_obs = pv_available(irr, ta, dev.theta_pv)
    w_obs = np.maximum(0.0, w_obs + 0.01 * w_obs.max() * rng.standard_normal(n_id))
    pv = fit_pvusa(irr, ta, w_obs)
    return ModelBundle(zone=zone, loop=loop, pv=pv, devices=dev)


# ---------------------------------------------------------------------------
# Closed loop

def _make_controller(scenario: Scenario, models: ModelBundle | None,
                     kind: str | None = None):
    cfg = scenario.cfg
    kind = kind or cfg.controller
    if kind == "mpc":
        if models is None:
            raise ValueError("MPC controller requires identified models")
        return MpcController(models, cfg.mode, lam=cfg.lam, dr=scenario.dr,
                             backend=cfg.backend)
    if kind == "thermostat":
        return BaselineController(scenario.devices, cfg.mode)
    raise ValueError(f"unknown controller {kind!r}")


def run_closed_loop(scenario: Scenario, models: ModelBundle | None = None,
                    controller_kind: str | None = None,
                    forecast_rng: np.random.Generator | None = None,
                    sources: tuple = ()) -> dict:
    """Simulate the run window; returns a trajectory dict of arrays."""
    cfg = scenario.cfg
    lam, n = cfg.lam, scenario.n_run
    kind = controller_kind or cfg.controller
    ctl = _make_controller(scenario, models, kind)
    sched = scenario.schedule_lead if kind == "thermostat" else scenario.schedule
    plant = Plant(scenario.plant_params, scenario.devices, scenario.grid)
    heating = cfg.mode == "heating"
    state = plant.initial_state(
        t_zone=float(sched.lower[:, 0].max()) if heating
        else float(sched.upper[:, 0].min()),
        t_tes=45.0 if heating else 20.0, t_hp_c=7.0)
    noise_rng = (seed_streams(cfg.seed, _STREAMS)["plant-noise"]
                 if scenario.plant_params.meas_noise_std > 0 else None)
    # one persistent error path per source and realization: each step sees a
    # window of the same path, so forecasts of a given instant refine smoothly
    # as the lead shrinks instead of jumping to an independent draw
    error_paths = {}
    if sources and forecast_rng is not None:
        error_paths = {src: ar2_path(Ar2Noise(), n + lam, forecast_rng)
                       for src in sources}

    cols = {key: [] for key in ("t_zone", "v", "w", "w_hp", "w_ees", "w_pv",
                                "e_ees", "loop", "t0", "solve_time")}
    for k in range(n):
        meas = plant.measure(state, noise_rng)
        if error_paths:
            fc = make_bundle_from_errors(
                scenario.t_ambient[k:k + lam], scenario.irradiance[k:k + lam],
                scenario.gains[k:k + lam], k, lam,
                {src: path[k:k + lam] for src, path in error_paths.items()})
        else:
            fc = make_bundle(scenario.t_ambient[k:k + lam],
                             scenario.irradiance[k:k + lam],
                             scenario.gains[k:k + lam], k, lam, rng=None)
        t_solve = time.perf_counter()
        decision, _diag = ctl.step(meas, fc, scenario.price[k:k + lam], k,
                                   sched.lower[:, k:k + lam],
                                   sched.upper[:, k:k + lam])
        solve_time = time.perf_counter() - t_solve
        exo = Exogenous(scenario.t_ambient[k], scenario.irradiance[k],
                        scenario.gains[k])
        cols["t_zone"].append(state.t_zone.copy())
        cols["loop"].append(state.t_tes if heating else state.t_hp_c_in)
        cols["e_ees"].append(state.e_ees)
        state, ledger, _ = plant.step(state, decision, exo, cfg.mode)
        cols["v"].append(decision.v.copy())
        cols["t0"].append(decision.t0)
        cols["w"].append(ledger.w)
        cols["w_hp"].append(ledger.w_hp)
        cols["w_ees"].append(ledger.w_ees)
        cols["w_pv"].append(ledger.w_pv)
        cols["solve_time"].append(solve_time)
    return {key: np.array(val) for key, val in cols.items()}


def report_from_trajectory(scenario: Scenario, traj: dict,
                           controller_kind: str | None = None) -> MetricsReport:
    kind = controller_kind or scenario.cfg.controller
    # comfort is judged against the nominal (unshifted) schedule for everyone
    return compute_report(traj["t_zone"], traj["w"], scenario.price,
                          scenario.schedule, scenario.dr,
                          solve_times=traj["solve_time"])


def write_trajectory_csv(path, scenario: Scenario, traj: dict) -> None:
    m = scenario.cfg.n_zones
    n = traj["w"].size
    header = (["k", "hour", "t_amb", "irradiance", "price", "w", "w_hp",
               "w_ees", "w_pv", "e_ees", "loop", "t0", "solve_time"]
              + [f"t_zone_{i}" for i in range(m)] + [f"v_{i}" for i in range(m)])
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for k in range(n):
            row = [k, round(scenario.grid.hour_of_day(k), 4),
                   scenario.t_ambient[k], scenario.irradiance[k],
                   scenario.price[k], traj["w"][k], traj["w_hp"][k],
                   traj["w_ees"][k], traj["w_pv"][k], traj["e_ees"][k],
                   traj["loop"][k], traj["t0"][k], traj["solve_time"][k]]
            row += list(traj["t_zone"][k]) + list(traj["v"][k])
            wr.writerow(row)


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> MetricsReport:
    scenario = build_scenario(cfg)
    models = identify(scenario) if cfg.controller == "mpc" else None
    traj = run_closed_loop(scenario, models)
    report = report_from_trajectory(scenario, traj)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_trajectory_csv(os.path.join(out_dir, "trajectory.csv"), scenario, traj)
        report.to_json(os.path.join(out_dir, "metrics.json"))
    return report


# ---------------------------------------------------------------------------
# Comparison and Monte-Carlo

def compare(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Run MPC and the thermostat on the identical scenario; report the delta."""
    scenario = build_scenario(cfg)
    models = identify(scenario)
    out = {}
    for kind in ("mpc", "thermostat"):
        traj = run_closed_loop(scenario, models, controller_kind=kind)
        out[kind] = report_from_trajectory(scenario, traj, kind)
        if out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
            write_trajectory_csv(os.path.join(out_dir, f"trajectory_{kind}.csv"),
                                 scenario, traj)
            out[kind].to_json(os.path.join(out_dir, f"metrics_{kind}.json"))
    base = out["thermostat"].overall_cost
    delta = 100.0 * (base - out["mpc"].overall_cost) / base if base else 0.0
    out["cost_reduction_pct"] = delta
    return out


def _mc_worker(args) -> dict:
    cfg_dict, realization, sources = args
    from .config import config_from_dict
    cfg = config_from_dict(cfg_dict)
    scenario = build_scenario(cfg)
    models = identify(scenario) if cfg.controller == "mpc" else None
    if realization < 0:   # nominal run: exact forecasts
        traj = run_closed_loop(scenario, models)
    else:
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=cfg.seed,
                                   spawn_key=(7919, realization)))
        traj = run_closed_loop(scenario, models, forecast_rng=rng,
                               sources=tuple(sources))
    rep = report_from_trajectory(scenario, traj)
    return {"realization": realization,
            "overall_cost": rep.overall_cost,
            "worst_zone_violation": rep.worst_zone_violation}


def monte_carlo(cfg: ExperimentConfig, out_dir=None, workers: int | None = None) -> dict:
    """Nominal run plus forecast-noise realizations; quartile/worst-case summary."""
    sources = tuple(cfg.uncertainty_sources) or ("temp", "irr", "gains")
    jobs = [(cfg.to_dict(), -1, sources)]
    jobs += [(cfg.to_dict(), r, sources) for r in range(cfg.realizations)]
    if workers is None:
        workers = min(4, os.cpu_count() or 1)
    if workers > 1 and len(jobs) > 2:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_mc_worker, jobs))
    else:
        rows = [_mc_worker(job) for job in jobs]
    rows.sort(key=lambda r: r["realization"])
    nominal = rows[0]
    samples = rows[1:]
    costs = np.array([r["overall_cost"] for r in samples])
    viols = np.array([r["worst_zone_violation"] for r in samples])
    summary = {
        "sources": list(sources),
        "realizations": len(samples),
        "nominal_cost": nominal["overall_cost"],
        "nominal_violation": nominal["worst_zone_violation"],
        "cost_quartiles": [float(q) for q in np.percentile(costs, [25, 50, 75])],
        "cost_worst": float(costs.max()),
        "cost_worst_inflation_pct": (
            100.0 * (costs.max() - nominal["overall_cost"])
            / nominal["overall_cost"] if nominal["overall_cost"] else 0.0),
        "violation_quartiles": [float(q) for q in np.percentile(viols, [25, 50, 75])],
        "violation_worst": float(viols.max()),
    }
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "boxplot.csv"), "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["realization", "sources", "overall_cost",
                         "worst_zone_violation"])
            for r in rows:
                wr.writerow([r["realization"], "+".join(sources),
                             r["overall_cost"], r["worst_zone_violation"]])
        with open(os.path.join(out_dir, "montecarlo.json"), "w") as fh:
            json.dump(summary, fh, indent=1)
    return summary
