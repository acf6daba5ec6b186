#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the two hot inner loops (uniaxial cluster products, semiclassical
window-matrix assembly) and an end-to-end semiclassical sweep point, then
reports the speedup. Also prints a linear-cost check: doubling the grid
or the sample count should roughly double the wall time.

Usage: python benchmarks/bench_kernels.py [--quick]
"""
import argparse
import time

import numpy as np

from spinbath import _kernels_py

try:
    from spinbath import _kernels_c
except ImportError:
    _kernels_c = None


def _time(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_uniaxial(quick: bool):
    rng = np.random.default_rng(0)
    nc, npts = 50, 2000 if quick else 20000
    A = rng.uniform(5e5, 2e6, nc)
    N = rng.integers(1, 60, nc).astype(float)
    t_M = rng.uniform(0, 1e-5, npts)
    t_I = rng.uniform(0, 1e-5, npts)
    args = (A, N, 0.5, t_M, t_I)
    rows = [("uniaxial_log_factors", f"{nc} clusters x {npts} points", args)]
    return rows


def bench_semiclassical(quick: bool):
    rng = np.random.default_rng(1)
    n, ns = 24, 50 if quick else 400
    b = rng.uniform(1e-4, 2e-3, n)
    om = np.repeat(rng.uniform(1.5e6, 3.5e6, 3), n // 3)
    A = rng.uniform(3e4, 3e5, n)
    dom = rng.normal(0, 1e4, (ns, n))
    t_m, t_i = 1e-6, 8e-6
    starts = np.array([0.0, t_m / 2])
    ends = np.array([t_m / 2, t_m])
    signs = np.array([1.0, -1.0])
    moments = (0.0, -t_m ** 2 / 4, -t_m ** 3 / 4)
    args = (b, om, A, dom, 3.1e10, t_m, t_i, t_i, starts, ends, signs, moments)
    return [("semiclassical_matrices", f"dim {n} x {ns} samples", args)]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true")
    opts = parser.parse_args()

    print(f"{'kernel':<26} {'problem':<28} {'numpy':>10} {'compiled':>10} {'speedup':>8}")
    for name, problem, args in bench_uniaxial(opts.quick) + bench_semiclassical(opts.quick):
        t_py = _time(getattr(_kernels_py, name), *args)
        if _kernels_c is None:
            print(f"{name:<26} {problem:<28} {t_py:>9.4f}s {'missing':>10} {'-':>8}")
            continue
        t_c = _time(getattr(_kernels_c, name), *args)
        print(f"{name:<26} {problem:<28} {t_py:>9.4f}s {t_c:>9.4f}s {t_py / t_c:>7.1f}x")

    # linear-cost check on the end-to-end sweep path
    from spinbath.config import validate_config
    from spinbath.sweep import run_sweep
    import tempfile

    base = """
[model]
kind = semiclassical
[grid]
t_M = 1e-6 1e-6 1 linear
t_I = 1e-6 3e-5 {steps} linear
[species.69Ga]
gamma_MHz_per_T = 10.2478
total_hyperfine_ueV = 74.0
abundance = 0.5
spin = 1.5
[species.75As]
gamma_MHz_per_T = 7.3150
total_hyperfine_ueV = 86.0
abundance = 0.5
spin = 1.5
[geometry]
z0_nm = 7.5
L_nm = 25.0
nu0_nm3 = 0.02258
N_total = 1000000
[physics]
B_ext_T = 0.04
delta_B_rms_T = 0.0002
n_clusters = 4
[execution]
seed = 1
mc_samples = {mc}
"""
    print("\nlinear-cost check (end-to-end sweep):")
    with tempfile.TemporaryDirectory() as tmp:
        times = {}
        for steps, mc in ((40, 25), (80, 25), (40, 50)):
            cfg = validate_config(base.format(steps=steps, mc=mc))
            t0 = time.perf_counter()
            run_sweep(cfg, tmp, name=f"b{steps}x{mc}")
            times[(steps, mc)] = time.perf_counter() - t0
        t0 = times[(40, 25)]
        print(f"  grid x2:    {times[(80, 25)] / t0:5.2f}x wall time (ideal 2.0)")
        print(f"  samples x2: {times[(40, 50)] / t0:5.2f}x wall time (ideal 2.0)")


if __name__ == "__main__":
    main()
