"""Timing comparison of the compiled kernels against the pure-Python fallback.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

The two hot loops are one-dimensional convolution and the state-grid sweep
accumulation.  The script times both backends on identical inputs, checks
they agree, and also times an end-to-end exact-factor computation under each
backend via subprocesses (backend choice is frozen at import time).
"""
import subprocess
import sys
import time

import numpy as np

from skellam_stein.kernels import load_backend


def _time(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_convolve(backends, rng):
    print("convolve (full, float64)")
    for size in (256, 4096, 32768):
        a = rng.random(size)
        b = rng.random(size)
        ref = None
        row = f"  n={size:<6d}"
        for name, mod in backends.items():
            got = mod.convolve(a, b)
            if ref is None:
                ref = got
            else:
                assert np.allclose(got, ref, atol=1e-12)
            row += f"  {name}: {1e3 * _time(mod.convolve, a, b):8.3f} ms"
        print(row)


def bench_sweep(backends, rng):
    print("sweep_accumulate (state grid x window)")
    for n_states, width in ((16, 200), (48, 600), (96, 1200)):
        base = rng.standard_normal(width)
        # Rows follow the kernel contract: row x is a pmf on 0..x (row 0 = [1]).
        bx = np.tril(rng.random((n_states, n_states)))
        by_rev = np.tril(rng.random((n_states, n_states)))
        for rows in (bx, by_rev):
            rows /= rows.sum(axis=1, keepdims=True)
        out_width = width + 2 * n_states
        args_of = lambda: (
            np.zeros((n_states, n_states, out_width)),
            base, n_states, bx, by_rev, 0.37,
        )
        ref = None
        row = f"  grid={n_states:>3d}^2 window={width:<5d}"
        for name, mod in backends.items():
            out, *rest = args_of()
            mod.sweep_accumulate(out, *rest)
            if ref is None:
                ref = out
            else:
                assert np.allclose(out, ref, atol=1e-12)
            row += f"  {name}: {1e3 * _time(lambda: mod.sweep_accumulate(*args_of())):8.3f} ms"
        print(row)


def bench_end_to_end():
    print("exact_stein_factor (rates 8,8 / order 2 / fresh process)")
    code = (
        "from skellam_stein import SkellamParams, exact_stein_factor;"
        "exact_stein_factor(SkellamParams(8.0, 8.0), 2, (1, 1))"
    )
    for name in ("c", "python"):
        t0 = time.perf_counter()
        subprocess.run(
            [sys.executable, "-c", code],
            check=True,
            env={"SKELLAM_STEIN_BACKEND": name, "PATH": "/usr/bin:/bin"},
        )
        print(f"  {name}: {time.perf_counter() - t0:6.2f} s (includes interpreter start)")


def main():
    backends = {}
    for name in ("c", "python"):
        try:
            backends[name] = load_backend(name)
        except ImportError:
            print(f"backend {name!r} unavailable, skipping")
    rng = np.random.default_rng(0)
    bench_convolve(backends, rng)
    bench_sweep(backends, rng)
    bench_end_to_end()


if __name__ == "__main__":
    main()
