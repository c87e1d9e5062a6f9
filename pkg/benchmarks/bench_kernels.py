#!/usr/bin/env python3
"""Throughput comparison: compiled kernels vs the pure-Python fallback.

Runs the three hot loops (edge-filter IIR, fractional delay shift, CRC-8)
over representative workloads and prints a speedup table. The native module
is imported directly so the comparison works regardless of which backend
the package selected at import time.

    python benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from pulsebench.kernels import _pyfallback

try:
    from pulsebench.kernels import _native
except ImportError:
    _native = None


def best_of(fn, repeats: int) -> float:
    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        timings.append(time.perf_counter() - start)
    return min(timings)


def workloads():
    rng = np.random.default_rng(42)
    # 100 ns window at 40 GS/s is 4000 samples; sweeps run thousands of them.
    trace = rng.normal(0.0, 1.0, 40_000)
    alpha = math.exp(-1.0 / 18.2)
    frames = [bytes(rng.integers(0, 256, 6, dtype=np.uint8)) for _ in range(2_000)]

    yield (
        "iir_lowpass (40k samples)",
        lambda impl: impl.iir_lowpass(trace, alpha),
    )
    yield (
        "fractional_shift (40k samples)",
        lambda impl: impl.fractional_shift(trace, 148, 0.4),
    )

    def crc_all(impl):
        for frame in frames:
            impl.crc8(frame)

    yield ("crc8 (2000 frames)", crc_all)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if _native is None:
        print("native kernels not built; showing fallback timings only")

    print(f"{'kernel':<34} {'python':>12} {'native':>12} {'speedup':>9}")
    for name, call in workloads():
        py_t = best_of(lambda: call(_pyfallback), args.repeats)
        if _native is not None:
            nat_t = best_of(lambda: call(_native), args.repeats)
            print(f"{name:<34} {py_t * 1e3:>10.3f}ms {nat_t * 1e3:>10.3f}ms "
                  f"{py_t / nat_t:>8.1f}x")
        else:
            print(f"{name:<34} {py_t * 1e3:>10.3f}ms {'-':>12} {'-':>9}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
