#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Run after `pip install -e . --no-build-isolation`:

    python scripts/bench_kernels.py
"""

import time

import numpy as np

from bodywheel.kernels import _pure

try:
    from bodywheel.kernels import _native
except ImportError:
    _native = None


def timeit(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    n = 200_000
    u1s = rng.uniform(-1, 1, n)
    u2s = rng.uniform(-1, 1, n)
    walls = rng.uniform(-50, 50, size=(40, 4))
    ts = np.cumsum(np.full(n, 0.02))
    pcs = np.cumsum(rng.normal(0, 0.05, size=(n, 4)), axis=0)
    a_segs = rng.uniform(-10, 10, size=(1500, 4))
    b_segs = rng.uniform(-10, 10, size=(1500, 4))

    cases = {
        f"simulate ({n} steps, 40 walls)": lambda impl: impl.simulate(
            0.0, 0.0, 0.0, u1s, u2s, 1.5, 1.5, 0.02, walls, 0.35, 0, None),
        f"pipeline_steps ({n} samples)": lambda impl: impl.pipeline_steps(
            pcs, ts, 0.05, 5, 1.0, 1.0, 0.0, 1.0),
        "segment_candidates (1500 x 1500)": lambda impl: impl.segment_candidates(
            a_segs, b_segs, 1e-9),
    }

    impls = [("pure", _pure)] + ([("native", _native)] if _native else [])
    width = max(len(k) for k in cases)
    print(f"{'kernel':<{width}}  " + "".join(f"{name:>12}" for name, _ in impls)
          + ("     speedup" if _native else ""))
    for label, case in cases.items():
        times = [timeit(lambda impl=impl: case(impl)) for _, impl in impls]
        row = f"{label:<{width}}  " + "".join(f"{t * 1e3:>10.1f}ms" for t in times)
        if _native:
            row += f"  {times[0] / times[-1]:>9.1f}x"
        print(row)
    if _native is None:
        print("\ncompiled backend not built; showing fallback only")


if __name__ == "__main__":
    main()
