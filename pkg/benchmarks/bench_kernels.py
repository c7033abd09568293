#!/usr/bin/env python3
"""Benchmark the compiled stencil kernels against the NumPy fallback.

Times the four hot kernels on representative grids and one end-to-end
ideal-gas step loop per backend.  Run from the repository root:

    python benchmarks/bench_kernels.py
"""
import math
import time

import numpy as np

from thermoflux import _stencils_py as pyk

try:
    from thermoflux import _stencils as cyk
except ImportError:
    cyk = None


def best_of(fn, repeats=5, loops=200):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(loops):
            fn()
        best = min(best, (time.perf_counter() - t0) / loops)
    return best


def bench_kernels():
    rng = np.random.default_rng(1)
    cases = []
    for n in (256, 1024):
        a = rng.uniform(0.5, 2.0, n)
        b = rng.uniform(0.5, 2.0, n)
        cases.append((f"lap1   n={n}", lambda f=b: pyk.lap1(f, 0.01),
                      (lambda f=b: cyk.lap1(f, 0.01)) if cyk else None))
        cases.append((f"dagb1  n={n}", lambda x=a, y=b: pyk.dagb1(x, y, 0.01),
                      (lambda x=a, y=b: cyk.dagb1(x, y, 0.01)) if cyk else None))
    for n in (64, 128):
        a2 = rng.uniform(0.5, 2.0, (n, n))
        b2 = rng.uniform(0.5, 2.0, (n, n))
        cases.append((f"lap2   n={n}^2", lambda f=b2: pyk.lap2(f, 0.01),
                      (lambda f=b2: cyk.lap2(f, 0.01)) if cyk else None))
        cases.append((f"dagb2  n={n}^2", lambda x=a2, y=b2: pyk.dagb2(x, y, 0.01),
                      (lambda x=a2, y=b2: cyk.dagb2(x, y, 0.01)) if cyk else None))

    print(f"{'kernel':<14} {'numpy':>12} {'compiled':>12} {'speedup':>9}")
    for name, py_fn, cy_fn in cases:
        t_py = best_of(py_fn)
        if cy_fn is None:
            print(f"{name:<14} {t_py*1e6:>10.1f}us {'n/a':>12} {'n/a':>9}")
            continue
        t_cy = best_of(cy_fn)
        np.testing.assert_array_equal(py_fn(), cy_fn())  # same bits, both ways
        print(f"{name:<14} {t_py*1e6:>10.1f}us {t_cy*1e6:>10.1f}us {t_py/t_cy:>8.1f}x")


def bench_end_to_end():
    import os
    import subprocess
    import sys
    code = (
        "import math, time, numpy as np\n"
        "from thermoflux import ModelParams, PeriodicGrid, ScalarField, SimState\n"
        "from thermoflux import kernels, solver\n"
        "model = ModelParams.ideal_gas(1.0, 1.0, d_tilde=1.0)\n"
        "grid = PeriodicGrid(dim=1, n=256, length=2*math.pi)\n"
        "(x,) = grid.meshgrid()\n"
        "state = SimState.from_primitive(model, ScalarField(grid, 1+0.2*np.sin(x)),\n"
        "                                ScalarField(grid, 1+0.2*np.cos(x)))\n"
        "t0 = time.perf_counter()\n"
        "for _ in range(2000):\n"
        "    state = solver.step(model, state, solver.stable_dt(model, state))\n"
        "dt = time.perf_counter() - t0\n"
        "print(f'{kernels.BACKEND}: 2000 rk2 steps n=256 in {dt:.2f}s "
        "({dt/2000*1e3:.3f} ms/step)')\n"
    )
    for force in ("0", "1"):
        env = dict(os.environ, THERMOFLUX_FORCE_PYTHON=force)
        sys.stdout.flush()
        subprocess.run([sys.executable, "-c", code], env=env, check=True)


if __name__ == "__main__":
    print("== kernel microbenchmarks ==")
    bench_kernels()
    print()
    print("== end-to-end ideal-gas step loop ==")
    bench_end_to_end()
