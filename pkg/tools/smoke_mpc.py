"""Smoke test of the horizon assembly and controller step."""
import numpy as np

from hvacmpc.core import DeviceParams
from hvacmpc.forecast import ForecastBundle
from hvacmpc.mpc import (DrProgram, DrRequest, History, ModelBundle,
                         MpcController, build_feasibility_lp,
                         build_operation_milp, dr_settlement,
                         recover_fan_commands)
from hvacmpc.optimizer import solve_binary_milp, solve_lp
from hvacmpc.sysid import LoopArxModel, PvusaModel, RegressorSpec, ZoneArxModel

# --- hand-built 1-zone models -------------------------------------------
spec = RegressorSpec(k_t=0, k_h=0, k_e=0, k_loop_state=0, k_loop_outlet=0,
                     k_loop_h=0, e_shared=4)
# T(k+1) = 0.9 T + 0.05 h + 0.1 TA   (e = [TA, I, I^2, I*TA, G])
zone_theta = np.array([[0.9, 0.05, 0.1, 0.0, 0.0, 0.0, 0.0]])
zone_meta = np.array([(0, 0, 0), (1, 0, 0), (2, 0, 0), (2, 0, 1),
                      (2, 0, 2), (2, 0, 3), (2, 0, 4)], dtype=np.int64)
zone = ZoneArxModel(theta=zone_theta, meta=zone_meta, spec=spec, n_zones=1, n_exo=5)
# T_TES(k+1) = 0.7 T_TES + 0.3 T_HP - 0.02 h
loop = LoopArxModel(theta=np.array([0.7, 0.3, -0.02]),
                    meta=np.array([(0, 0, 0), (1, 0, 0), (2, 0, 0)], dtype=np.int64),
                    spec=spec, n_zones=1)
pv = PvusaModel(theta=np.array([9e-3, 0.0, 4e-5]))
dev = DeviceParams(gamma=np.array([1.0]), v_max=np.array([2.0]),
                   alpha_hp_h=0.5, alpha_hp_c=0.5, eta=0.9, e_max=10.0,
                   w_charge_max=3.0, w_discharge_max=3.0,
                   theta_pv=pv.theta)
models = ModelBundle(zone=zone, loop=loop, pv=pv, devices=dev)

lam = 6
meas = {"t_zone": np.array([19.0]), "t_tes": 40.0, "t_hp_h": 40.0, "e_ees": 2.0}
fc = ForecastBundle(t_ambient=np.full(lam, 5.0), irradiance=np.zeros(lam),
                    gains=np.zeros((lam, 1)))
hist = History(1)
hist.seed(meas["t_zone"], np.zeros(1), fc.exo_matrix()[0], 40.0, 40.0)

# oracle: T(k)=19, lower bound 20 at t=0 only, 15 afterwards, no heating
# authority needed for later steps -> feasibility objective exactly 1.0
lo = np.full((1, lam), 15.0)
lo[0, 0] = 20.0
hi = np.full((1, lam), 28.0)
lp, var = build_feasibility_lp(models, meas, fc, 0, lam, "heating", hist,
                               lo, hi, (0.0, 55.0))
res = solve_lp(lp, "simplex")
print("feasibility:", res.status, "obj =", res.objective)
assert abs(res.objective - 1.0) < 1e-8, res.objective

# persistent lower bound 20: slacks only at t=0 since heating authority exists
lo2 = np.full((1, lam), 20.0)
lp2, var2 = build_feasibility_lp(models, meas, fc, 0, lam, "heating", hist,
                                 lo2, hi, (0.0, 55.0))
res2 = solve_lp(lp2, "simplex")
print("feasibility-2:", res2.status, "obj =", res2.objective)
d_lo = res2.x[var2["slack_lo"]]
d_hi = res2.x[var2["slack_hi"]]
print("slack_lo:", d_lo.ravel())

# operation problem with the widened bounds must be feasible
price = np.full(lam, 0.2)
dr = DrProgram((DrRequest(start=1, length=2, energy_bound=0.5, reward=1.0),))
op = build_operation_milp(models, meas, fc, price, dr, (d_lo, d_hi),
                          0, lam, "heating", hist, lo2, hi, (0.0, 55.0))
opres = solve_binary_milp(op.milp, "simplex")
print("operation:", opres.status, "obj =", opres.objective,
      "eps =", opres.binary_assignment)
assert opres.is_optimal
xs = opres.x
print("T plan:", xs[op.var["t"]].ravel().round(3))
print("h plan:", xs[op.var["h"]].ravel().round(3))
print("W plan:", xs[op.var["w"]].round(3))
print("T0 plan:", xs[op.var["t0"]].round(3))
print("E plan:", xs[op.var["e"]].round(3))

# full controller step
ctl = MpcController(models, "heating", lam=lam, dr=dr, backend="simplex")
dec, diag = ctl.step(meas, fc, price, 0, lo2, hi)
print("decision: v =", dec.v, "t0 =", round(dec.t0, 3),
      "w+/- =", dec.w_charge, dec.w_discharge, "w_pv =", dec.w_pv)
print("diag: obj =", round(diag.objective, 4), "slack =", round(diag.slack_total, 4),
      "eps =", diag.eps)

# fan recovery and settlement basics
v = recover_fan_commands(np.array([2.0]), 40.0, np.array([19.0]),
                         dev.gamma, dev.v_max)
assert np.allclose(v, 2.0 / 21.0), v
flags, total, recs = dr_settlement(dr, xs[op.var["w"]])
print("settlement:", flags, total)
print("smoke-mpc OK")
