"""Benchmark the witness-search hot kernels: numba @njit vs pure numpy.

Runs the penalty value/gradient kernels and a full projected-gradient
descent on representative problem sizes with both implementations and
prints a timing table.  Usage:

    python benchmarks/bench_witness.py [--repeats N]

The packaged search uses whichever backend ENTDIS_BACKEND selects
(default: numba); this script always times both directly.
"""
import argparse
import time

import numpy as np

from entdis import _kernels as K
from entdis.search import pair_operators
from entdis.states import bell_set, theorem1_set


def problems():
    yield "pair d=4", pair_operators(bell_set(4, [(0, 0), (1, 2)]))
    yield "pair d=8", pair_operators(bell_set(8, [(0, 0), (3, 5)]))
    yield "family d=9 (N=8)", pair_operators(theorem1_set(9))
    yield "family d=16 (N=11)", pair_operators(theorem1_set(16))
    yield "family d=20 (N=12)", pair_operators(theorem1_set(20))


def descend(value, value_grad, W, Wd, alpha, iterations=300):
    f, grad = value_grad(W, Wd, alpha)
    step = 1.0
    for _ in range(iterations):
        rg = grad - np.real(np.vdot(alpha, grad)) * alpha
        gn2 = float(np.real(np.vdot(rg, rg)))
        if gn2 < 1e-24:
            break
        step = min(step * 2.0, 1e6)
        while step >= 1e-18:
            trial = alpha - step * rg
            trial /= np.linalg.norm(trial)
            fc = value(W, trial)
            if fc <= f - 1e-4 * step * gn2:
                break
            step *= 0.5
        alpha, f = trial, fc
        f, grad = value_grad(W, Wd, alpha)
    return f


def time_backend(value, value_grad, W, repeats):
    d = W.shape[1]
    Wd = np.ascontiguousarray(np.conj(np.swapaxes(W, 1, 2)))
    rng = np.random.default_rng(0)
    alpha = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    alpha /= np.linalg.norm(alpha)
    value(W, alpha)  # warm up (JIT compile for the numba path)
    value_grad(W, Wd, alpha)

    t0 = time.perf_counter()
    for _ in range(repeats):
        value(W, alpha)
    t_val = (time.perf_counter() - t0) / repeats

    t0 = time.perf_counter()
    for _ in range(repeats):
        value_grad(W, Wd, alpha)
    t_grad = (time.perf_counter() - t0) / repeats

    t0 = time.perf_counter()
    descend(value, value_grad, W, Wd, alpha)
    t_desc = time.perf_counter() - t0
    return t_val, t_grad, t_desc


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=2000)
    args = parser.parse_args()

    print(f"selected backend: {K.BACKEND} (numba available: {K.NUMBA_AVAILABLE})")
    header = f"{'problem':<20} {'kernel':<7} {'value':>10} {'value+grad':>12} {'descent(300it)':>15}"
    print(header)
    print("-" * len(header))
    for name, W in problems():
        rows = [("numpy", K.penalty_value_numpy, K.penalty_value_grad_numpy)]
        if K.NUMBA_AVAILABLE:
            rows.append(("numba", K.penalty_value_numba, K.penalty_value_grad_numba))
        timings = {}
        for label, value, value_grad in rows:
            t_val, t_grad, t_desc = time_backend(value, value_grad, W, args.repeats)
            timings[label] = (t_val, t_grad, t_desc)
            print(
                f"{name:<20} {label:<7} {t_val*1e6:>8.1f}us {t_grad*1e6:>10.1f}us {t_desc*1e3:>13.1f}ms"
            )
        if len(timings) == 2:
            speed = timings["numpy"][1] / timings["numba"][1]
            print(f"{'':<20} numba speedup on value+grad: {speed:.2f}x")


if __name__ == "__main__":
    main()
