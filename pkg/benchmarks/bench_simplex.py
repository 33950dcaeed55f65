"""Benchmark: numba vs pure-numpy simplex kernels (and HiGHS for reference).

Run:  python benchmarks/bench_simplex.py
The numpy fallback is what you get with HVACMPC_NO_NUMBA=1.
"""

import time

import numpy as np

from hvacmpc._accel import NUMBA_ENABLED
from hvacmpc.optimizer import LinearProgram, solve_lp
from hvacmpc.optimizer.simplex import solve_simplex


def random_lp(rng: np.random.Generator, m: int, n: int) -> LinearProgram:
    """Feasible-by-construction random LP with mixed senses and bounds."""
    a = rng.normal(size=(m, n)) * (rng.random((m, n)) < 0.4)
    x0 = rng.uniform(0.0, 2.0, size=n)
    b = a @ x0
    senses = rng.integers(-1, 2, size=m).astype(np.int8)
    b = b + np.where(senses == -1, rng.uniform(0.1, 1.0, m),
                     np.where(senses == 1, -rng.uniform(0.1, 1.0, m), 0.0))
    rows, cols = np.nonzero(a)
    return LinearProgram(c=rng.normal(size=n), a_rows=rows, a_cols=cols,
                         a_vals=a[rows, cols], senses=senses, rhs=b,
                         lb=np.zeros(n), ub=np.full(n, 10.0))


def bench(sizes=((30, 60), (80, 160), (150, 300), (250, 500)), reps=5, seed=0):
    rng = np.random.default_rng(seed)
    problems = {sz: [random_lp(rng, *sz) for _ in range(reps)] for sz in sizes}
    if NUMBA_ENABLED:
        solve_simplex(problems[sizes[0]][0])      # JIT warmup
    print(f"numba enabled: {NUMBA_ENABLED}")
    print(f"{'size':>12} {'numba' if NUMBA_ENABLED else 'n/a':>10} "
          f"{'numpy':>10} {'highs':>10}  agreement")
    for sz, lps in problems.items():
        times = {"numba": [], "numpy": [], "highs": []}
        objs = {"numba": [], "numpy": [], "highs": []}
        for lp in lps:
            if NUMBA_ENABLED:
                t = time.perf_counter()
                r = solve_simplex(lp)
                times["numba"].append(time.perf_counter() - t)
                objs["numba"].append(r.objective)
            t = time.perf_counter()
            r = solve_simplex(lp, force_numpy=True)
            times["numpy"].append(time.perf_counter() - t)
            objs["numpy"].append(r.objective)
            t = time.perf_counter()
            r = solve_lp(lp, backend="highs")
            times["highs"].append(time.perf_counter() - t)
            objs["highs"].append(r.objective)
        ref = np.array(objs["highs"])
        agree = all(np.allclose(np.array(objs[k]), ref, atol=1e-6)
                    for k in ("numba", "numpy") if objs[k])
        nb = (f"{1e3 * np.mean(times['numba']):9.2f}ms" if NUMBA_ENABLED
              else "       n/a")
        print(f"{str(sz):>12} {nb} {1e3 * np.mean(times['numpy']):9.2f}ms "
              f"{1e3 * np.mean(times['highs']):9.2f}ms  {'ok' if agree else 'MISMATCH'}")


if __name__ == "__main__":
    bench()
