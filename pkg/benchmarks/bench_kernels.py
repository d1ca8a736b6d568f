"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--family close2:alpha=1]

Reports the best-of-``repeat`` wall time per call and the largest relative
disagreement between the two backends.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from zygmund import _backend
from zygmund.young import parse_family


def best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--family", default="close2:alpha=1")
    ap.add_argument("--rel-tol", type=float, default=1e-10)
    args = ap.parse_args(argv)
    if _backend.compiled is None:
        raise SystemExit("compiled extension not built; run `pip install --no-build-isolation -e .`")

    params = parse_family(args.family).kernel_params()
    rng = np.random.default_rng(0)
    print(f"family {args.family}, rel_tol {args.rel_tol}")
    print(f"{'case':<28}{'compiled [s]':>14}{'python [s]':>14}{'speedup':>10}{'max rel diff':>15}")

    def row(name, fc, fp, values):
        tc, vc = best_time(fc, args.repeat)
        tp, vp = best_time(fp, args.repeat)
        diff = float(np.max(np.abs(values(vc) / values(vp) - 1)))
        print(f"{name:<28}{tc:>14.4g}{tp:>14.4g}{tp / tc:>10.2f}{diff:>15.2e}")

    for M in (64, 4096, 65536, 1_000_000):
        absf = np.abs(rng.standard_normal(M) + 1j * rng.standard_normal(M))
        absf /= absf.max()
        w = np.full(M, 1.0 / M)
        row(
            f"single norm, M={M}",
            lambda: _backend.compiled.luxemburg_abs(absf, w, *params, args.rel_tol, 200),
            lambda: _backend.python.luxemburg_abs(absf, w, *params, args.rel_tol, 200),
            lambda r: np.array([r[0]]),
        )
    for B, M in ((10_000, 64), (1_000, 1024)):
        F = np.abs(3 * rng.standard_normal((B, M)))
        F = np.ascontiguousarray(F / F.max(axis=1, keepdims=True))
        w = np.full(M, 1.0 / M)
        row(
            f"row batch, {B}x{M}",
            lambda: _backend.compiled.luxemburg_rows(F, w, *params, args.rel_tol, 200),
            lambda: _backend.python.luxemburg_rows(F, w, *params, args.rel_tol, 200),
            lambda r: r[0],
        )


if __name__ == "__main__":
    main()
