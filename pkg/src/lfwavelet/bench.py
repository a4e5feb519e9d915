"""Timing harness comparing the naive and the fast Fourier transform.

Run ``python -m lfwavelet.bench`` for the default configuration
(q = 2, window (6, 6), 4096 cells).
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

import numpy as np

from .field import FieldParams
from .functions import POINT, TestFunction, Window, fourier_fast, fourier_forward


@dataclass(frozen=True)
class BenchResult:
    cells: int
    naive_seconds: float
    fast_seconds: float
    max_deviation: float

    @property
    def speedup(self) -> float:
        return self.naive_seconds / self.fast_seconds


def _best_of(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def benchmark_transform(
    params: FieldParams, window: Window = Window(6, 6), repeats: int = 3, seed: int = 0
) -> BenchResult:
    """Best-of-``repeats`` wall time of both transforms on one random function."""
    rng = np.random.default_rng(seed)
    n = window.size(params.q)
    f = TestFunction(params, POINT, window, rng.standard_normal(n) + 1j * rng.standard_normal(n))
    slow, fast = fourier_forward(f), fourier_fast(f)
    dev = float(np.max(np.abs(slow.values - fast.values)))
    return BenchResult(n, _best_of(lambda: fourier_forward(f), repeats), _best_of(lambda: fourier_fast(f), repeats), dev)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="naive vs fast Fourier transform timing")
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--c", type=int, default=1)
    ap.add_argument("--M", type=int, default=6)
    ap.add_argument("--N", type=int, default=6)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    res = benchmark_transform(FieldParams(args.p, args.c), Window(args.M, args.N), args.repeats, args.seed)
    print(
        f"cells={res.cells} naive={res.naive_seconds:.4f}s fast={res.fast_seconds:.6f}s "
        f"speedup={res.speedup:.1f}x max_dev={res.max_deviation:.2e}"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
