"""End-to-end acceptance suite.

Each test encodes one release criterion: hand oracles for the device
equations, identification closure on known systems, MILP-vs-enumeration
equivalence, two-step feasibility over randomized scenarios, battery
exclusivity, demand-response settlement arithmetic, the desk-scale
MPC-vs-thermostat comparison, forecast-uncertainty robustness, and the
large-instance performance/determinism check. The comparison, Monte-Carlo
and scale tests run full closed loops and dominate the suite's runtime.
"""

import time

import numpy as np
import pytest

from hvacmpc.core import ComfortSchedule, DeviceParams
from hvacmpc.forecast import ForecastBundle, temperature_forecast
from hvacmpc.harness.config import config_from_dict
from hvacmpc.harness.metrics import compute_report
from hvacmpc.harness.runner import (build_scenario, compare, identify,
                                    monte_carlo)
from hvacmpc.mpc import (DrProgram, DrRequest, History, ModelBundle,
                         MpcController, build_feasibility_lp, dr_settlement)
from hvacmpc.optimizer import MilpSpec, solve_binary_milp, solve_lp
from hvacmpc.optimizer.problem import GE, LE, LpBuilder
from hvacmpc.plant import ees_step, fan_heat_flow, hp_energy, pv_available
from hvacmpc.sysid import (RegressorSpec, ZoneArxModel, LoopArxModel,
                           PvusaModel, fit_arx, fit_index)


# --- criterion 1: equation oracles ------------------------------------------

class TestEquationOracles:
    def test_hand_values(self):
        start = time.monotonic()
        assert fan_heat_flow(2.0, 40.0, 20.0, 0.5) == pytest.approx(20.0, rel=1e-9)
        assert fan_heat_flow(1.5, 10.0, 25.0, 1.0) == pytest.approx(-22.5, rel=1e-9)
        assert hp_energy("heating", 45.0, 40.0, 0.8) == pytest.approx(4.0, rel=1e-9)
        assert hp_energy("cooling", 7.0, 12.0, 0.8) == pytest.approx(4.0, rel=1e-9)
        assert ees_step(10.0, 2.0, 0.0, 0.9) == pytest.approx(11.8, rel=1e-9)
        assert ees_step(10.0, 0.0, 0.9, 0.9) == pytest.approx(9.0, rel=1e-9)
        theta = np.array([1.6e-3, -5e-8, -1e-6])
        assert pv_available(1000.0, 25.0, theta) == pytest.approx(1.525, rel=1e-9)
        assert fit_index([0.0, 2.0], [1.0, 1.0]) == pytest.approx(0.0, abs=1e-9)
        out = temperature_forecast(np.array([5.0, 6.0, 7.0]),
                                   np.array([3.0, 3.0, 3.0]), k=0, lam=3)
        assert out[0] == pytest.approx(5.0, rel=1e-9)
        assert out[2] == pytest.approx(9.0, rel=1e-9)
        assert time.monotonic() - start < 1.0


# --- criterion 2: identification closure -------------------------------------

class TestIdentificationClosure:
    def test_known_arx_recovery(self):
        start = time.monotonic()
        rng = np.random.default_rng(20)
        m, n_exo = 5, 2
        adj = np.zeros((m, m), dtype=bool)
        for i in range(m - 1):
            adj[i, i + 1] = adj[i + 1, i] = True
        spec = RegressorSpec(k_t=1, k_h=1, k_e=1, adjacency=adj, e_shared=2)
        from hvacmpc.sysid import _lagged_blocks, _zone_mask
        dummy = np.zeros((3, m))
        _, meta = _lagged_blocks([(dummy, 1), (dummy, 1),
                                  (np.zeros((3, n_exo)), 1)])
        theta = np.zeros((m, meta.shape[0]))
        for i in range(m):
            for c in np.nonzero(_zone_mask(spec, meta, i, m, n_exo))[0]:
                blk, lag, idx = meta[c]
                if blk == 0:
                    theta[i, c] = ((0.55 if lag == 0 else 0.2) if idx == i
                                   else 0.02 * rng.uniform(0.5, 1.0))
                elif blk == 1:
                    theta[i, c] = 0.4 * rng.uniform(0.5, 1.5)
                else:
                    theta[i, c] = 0.08 * rng.uniform(-1.0, 1.0)
        truth = ZoneArxModel(theta=theta, meta=meta, spec=spec, n_zones=m,
                             n_exo=n_exo)
        # 18 days of 10-minute data: the default split keeps 14 days for
        # estimation and the rest for validation
        n = 18 * 144
        t = np.zeros((n, m))
        t[0] = t[1] = 20.0
        h = rng.uniform(0.0, 3.0, size=(n, m))
        e = 10.0 * rng.standard_normal((n, n_exo))
        for k in range(1, n - 1):
            t[k + 1] = truth.predict(t[:k + 1], h[:k + 1], e[:k + 1])
        noisy = {"t": t + rng.normal(0.0, 0.05, t.shape), "h": h, "e": e}
        model = fit_arx(noisy, spec, target="zone")
        assert np.max(np.abs(model.theta - theta)) <= 5e-2
        assert model.diagnostics["fit_1step"] >= 95.0
        assert time.monotonic() - start < 30.0


# --- criterion 3: MILP equals enumeration -------------------------------------

class TestMilpEnumeration:
    def test_matches_exhaustive_lp(self):
        start = time.monotonic()
        rng = np.random.default_rng(33)
        for _ in range(50):
            nc = int(rng.integers(1, 9))
            nb = int(rng.integers(0, 4))
            b = LpBuilder()
            x = [b.add_var(0.0, float(rng.uniform(1.0, 5.0)),
                           cost=float(rng.normal())) for _ in range(nc)]
            eps = [b.add_var(0.0, 1.0, cost=-float(rng.uniform(0.2, 3.0)))
                   for _ in range(nb)]
            # demand rows keep x away from zero; cap rows tighten under eps=1
            picks = rng.choice(nc, size=min(nc, 3), replace=False)
            b.add_row([x[i] for i in picks], [1.0] * picks.size, GE,
                      float(rng.uniform(0.2, 1.0)))
            caps = []
            for j in range(nb):
                d = float(rng.uniform(0.2, 4.0))
                rhs = float(rng.uniform(0.5, 6.0))
                b.add_row([x[i] for i in picks] + [eps[j]],
                          [1.0] * picks.size + [d], LE, rhs)
                caps.append((picks, d, rhs))
            lp = b.build()
            res = solve_binary_milp(MilpSpec(lp=lp, binary_idx=np.array(
                eps, dtype=np.int64)))

            # exhaustive reference: fix each assignment through the bounds
            best = None
            for word in range(2 ** nb):
                bits = np.array([(word >> j) & 1 for j in range(nb)], float)
                sub = solve_lp(lp.with_bounds(np.array(eps, dtype=np.int64),
                                              bits, bits))
                if sub.status == "optimal" and (best is None
                                                or sub.objective < best - 1e-12):
                    best = sub.objective
            if best is None:
                assert res.status == "infeasible"
            else:
                assert res.status == "optimal"
                assert res.objective == pytest.approx(best, abs=1e-7)
                # big-M logic: accepted caps must hold at the solution
                for j, (picks_j, d, rhs) in enumerate(caps):
                    if res.binary_assignment[j] == 1:
                        lhs = sum(res.x[x[i]] for i in picks_j)
                        assert lhs <= rhs - d + 1e-7
        assert time.monotonic() - start < 30.0


# --- criteria 4 and 5: two-step feasibility and battery exclusivity ----------

def _orders0_bundle(rng, m):
    """Random stable zone/loop models with order-0 regressors for m zones."""
    n_exo = 4 + m
    spec = RegressorSpec(k_t=0, k_h=0, k_e=0, k_loop_state=0,
                         k_loop_outlet=0, k_loop_h=0, e_shared=4)
    meta = np.array([(0, 0, j) for j in range(m)]
                    + [(1, 0, j) for j in range(m)]
                    + [(2, 0, j) for j in range(n_exo)], dtype=np.int64)
    theta = np.zeros((m, meta.shape[0]))
    for i in range(m):
        a = rng.uniform(0.82, 0.93)
        theta[i, i] = a
        theta[i, m + i] = rng.uniform(0.03, 0.08)      # own heat input
        theta[i, 2 * m] = (1.0 - a) * rng.uniform(0.6, 1.0)   # ambient pull
    zone = ZoneArxModel(theta=theta, meta=meta, spec=spec, n_zones=m,
                        n_exo=n_exo)
    loop_meta = np.array([(0, 0, 0), (1, 0, 0)]
                         + [(2, 0, j) for j in range(m)], dtype=np.int64)
    loop_theta = np.concatenate([[0.75, 0.25], np.full(m, -0.004)])
    loop = LoopArxModel(theta=loop_theta, meta=loop_meta, spec=spec, n_zones=m)
    pv = PvusaModel(theta=np.array([1.2e-3, 0.0, 1e-6]))
    dev = DeviceParams(gamma=np.full(m, 0.08), v_max=np.full(m, 2.5),
                       alpha_hp_h=0.2, alpha_hp_c=0.2, eta=0.92, e_max=10.0,
                       w_charge_max=1.5, w_discharge_max=1.5,
                       theta_pv=pv.theta)
    return ModelBundle(zone=zone, loop=loop, pv=pv, devices=dev)


def _random_scenario(rng, m, lam):
    mode = "heating" if rng.random() < 0.5 else "cooling"
    models = _orders0_bundle(rng, m)
    if mode == "heating":
        lo = np.full((m, lam), rng.uniform(18.0, 21.0, m)[:, None])
        hi = lo + rng.uniform(4.0, 7.0)
        ta = rng.uniform(-5.0, 10.0)
        t_zone = lo[:, 0] + rng.uniform(-4.0, 2.0, m)
        meas = {"t_zone": t_zone, "t_tes": rng.uniform(38.0, 48.0),
                "e_ees": rng.uniform(0.0, 10.0)}
        meas["t_hp_h"] = meas["t_tes"] + rng.uniform(0.0, 5.0)
    else:
        hi = np.full((m, lam), rng.uniform(23.0, 26.0, m)[:, None])
        lo = hi - rng.uniform(4.0, 7.0)
        ta = rng.uniform(25.0, 35.0)
        t_zone = hi[:, 0] + rng.uniform(-2.0, 4.0, m)
        meas = {"t_zone": t_zone, "t_hp_c_in": rng.uniform(10.0, 16.0),
                "e_ees": rng.uniform(0.0, 10.0)}
        meas["t_hp_c"] = rng.uniform(5.5, meas["t_hp_c_in"] - 1.0)
    if rng.random() < 0.3:
        # deliberately unreachable comfort bounds
        if mode == "heating":
            lo = lo + 15.0
            hi = hi + 15.0
        else:
            lo = lo - 15.0
            hi = hi - 15.0
    fc = ForecastBundle(
        t_ambient=np.full(lam, ta) + rng.normal(0.0, 0.5, lam),
        irradiance=np.clip(rng.uniform(-200.0, 600.0, lam), 0.0, None),
        gains=rng.uniform(0.0, 1.0, (lam, m)))
    price = rng.uniform(0.02, 0.4, lam)
    dr = DrProgram()
    if rng.random() < 0.3:
        s = int(rng.integers(0, lam - 4))
        dr = DrProgram((DrRequest(start=s, length=int(rng.integers(2, 5)),
                                  energy_bound=float(rng.uniform(0.5, 5.0)),
                                  reward=float(rng.uniform(0.1, 2.0))),))
    return mode, models, meas, fc, price, lo, hi, dr


@pytest.fixture(scope="module")
def two_step_runs():
    """200 randomized single-step runs of the two-step strategy."""
    rng = np.random.default_rng(4242)
    m, lam = 10, 24
    start = time.monotonic()
    runs = []
    for _ in range(200):
        mode, models, meas, fc, price, lo, hi, dr = _random_scenario(rng, m, lam)
        ctl = MpcController(models, mode, lam=lam, dr=dr)
        # the controller step raises on any unexpected infeasibility
        decision, diag = ctl.step(meas, fc, price, 0, lo, hi)

        # re-solve the relaxation with bounds widened by its own slacks:
        # the residual violation must be zero
        lp, var = build_feasibility_lp(models, meas, fc, 0, lam, mode,
                                       ctl.history, lo, hi, ctl.t0_bounds)
        res = solve_lp(lp)
        assert res.status == "optimal"
        d_lo = res.x[var["slack_lo"]]
        d_hi = res.x[var["slack_hi"]]
        lp2, _ = build_feasibility_lp(models, meas, fc, 0, lam, mode,
                                      ctl.history, lo - d_lo, hi + d_hi,
                                      ctl.t0_bounds)
        res2 = solve_lp(lp2)
        runs.append({"mode": mode, "plan": diag.plan, "dev": models.devices,
                     "widened_obj": res2.objective,
                     "widened_status": res2.status})
    return {"runs": runs, "elapsed": time.monotonic() - start}


class TestTwoStepFeasibility:
    def test_never_infeasible_and_zero_residual(self, two_step_runs):
        assert len(two_step_runs["runs"]) == 200
        for run in two_step_runs["runs"]:
            assert run["widened_status"] == "optimal"
            assert abs(run["widened_obj"]) <= 1e-6
        assert two_step_runs["elapsed"] < 300.0


class TestBatteryExclusivity:
    def test_no_simultaneous_charge_discharge(self, two_step_runs):
        for run in two_step_runs["runs"]:
            plan = run["plan"]
            wp, wm, e = plan["w_plus"], plan["w_minus"], plan["e"]
            e_max = run["dev"].e_max
            at_bound = (np.minimum(e[:-1], e[1:]) <= 1e-6) \
                | (np.maximum(e[:-1], e[1:]) >= e_max - 1e-6)
            bad = (wp * wm > 1e-9) & ~at_bound
            assert not bad.any(), (wp[bad], wm[bad])


# --- criterion 6: demand-response settlement arithmetic ----------------------

class TestDrArithmetic:
    def test_settlement_and_table_identity(self):
        program = DrProgram((
            DrRequest(start=107, length=5, energy_bound=37.0, reward=3.6),
            DrRequest(start=178, length=6, energy_bound=40.0, reward=4.4),
            DrRequest(start=325, length=3, energy_bound=6.0, reward=2.8),
        ))
        n = 432
        w = np.full(n, 9.0)
        w[107:112] = 37.0 / 5.0          # fulfilled (inclusive bound)
        w[178:184] = 39.5 / 6.0          # fulfilled
        w[325:328] = 2.5                 # 7.5 > 6: missed
        flags, reward, _ = dr_settlement(program, w)
        assert flags.tolist() == [1, 1, 0]
        assert reward == 8.0             # exactly, zero tolerance
        price = np.full(n, 0.1)
        sched = ComfortSchedule(lower=np.full((1, n), 15.0),
                                upper=np.full((1, n), 30.0))
        rep = compute_report(np.full((n, 1), 22.0), w, price, sched, program)
        assert rep.dr_reward == 8.0
        assert rep.overall_cost == rep.cost_without_dr - 8.0


# --- criterion 7: MPC vs thermostat, desk scale -------------------------------

class TestComparativeClaim:
    def test_winter_cost_reduction(self):
        start = time.monotonic()
        cfg = config_from_dict(dict(name="winter-desk", mode="heating",
                                    seed=7, days=3.0, n_zones=20, lam=72,
                                    controller="mpc"))
        out = compare(cfg)
        mpc, thermo = out["mpc"], out["thermostat"]
        assert out["cost_reduction_pct"] >= 10.0
        assert mpc.overall_cost < thermo.overall_cost
        assert mpc.worst_zone_violation \
            <= thermo.worst_zone_violation + 0.05
        assert time.monotonic() - start < 1200.0


# --- criterion 8: forecast-uncertainty robustness ------------------------------

class TestUncertaintyRobustness:
    def test_monte_carlo_worst_case(self):
        start = time.monotonic()
        cfg = config_from_dict(dict(name="mc-desk", mode="heating", seed=7,
                                    days=3.0, n_zones=10, lam=72,
                                    controller="mpc", realizations=20,
                                    uncertainty_sources=["temp", "irr",
                                                         "gains"]))
        summary = monte_carlo(cfg, workers=1)
        assert summary["realizations"] == 20
        assert summary["cost_worst_inflation_pct"] <= 15.0
        assert summary["violation_worst"] \
            <= summary["nominal_violation"] + 0.05
        assert time.monotonic() - start < 7200.0


# --- criterion 9: scale and determinism ---------------------------------------

class TestScalePerformance:
    def test_large_instance_step(self):
        cfg = config_from_dict(dict(name="scale", mode="heating", seed=7,
                                    days=1.0, n_zones=126, lam=72,
                                    controller="mpc",
                                    identification_days=6.0))
        scenario = build_scenario(cfg)
        models = identify(scenario)
        from hvacmpc.plant import Plant
        plant = Plant(scenario.plant_params, scenario.devices, scenario.grid)
        state = plant.initial_state(
            t_zone=float(scenario.schedule.lower[:, 0].max()), t_tes=45.0)
        meas = plant.measure(state, None)
        lam = cfg.lam
        fc = ForecastBundle(t_ambient=scenario.t_ambient[:lam],
                            irradiance=scenario.irradiance[:lam],
                            gains=scenario.gains[:lam])
        objectives = []
        for _ in range(2):
            ctl = MpcController(models, "heating", lam=lam)
            t0 = time.monotonic()
            _, diag = ctl.step(meas, fc, scenario.price[:lam], 0,
                               scenario.schedule.lower[:, :lam],
                               scenario.schedule.upper[:, :lam])
            elapsed = time.monotonic() - t0
            assert elapsed <= 120.0
            objectives.append(diag.objective)
        assert objectives[0] == objectives[1]
