#!/usr/bin/env python3
"""Benchmark the numba root-finding kernel against the pure-numpy fallback.

The Aberth-Ehrlich batch solver dominates every Monte Carlo experiment, so
this is the comparison that decides whether ZEROCOND_DISABLE_NUMBA is
affordable on a given machine.

Usage:
    python benchmarks/bench_backends.py
    python benchmarks/bench_backends.py --degrees 25 50 100 200 --batch 256
    python benchmarks/bench_backends.py --output results.json
"""

import argparse
import json
import time

import numpy as np

from zerocond._aberth import (
    NUMBA_AVAILABLE,
    aberth_batch_numba,
    aberth_batch_numpy,
)
from zerocond.ensembles import EnsembleSpec
from zerocond.numerics import sample_std_complex_gaussian_array, trial_rng
from zerocond.zeros import monomial_rows


def make_batch(degree: int, batch: int, seed: int = 0) -> np.ndarray:
    spec = EnsembleSpec.projective_line(degree)
    coeffs = np.empty((batch, spec.dim), dtype=np.complex128)
    for i in range(batch):
        rng = trial_rng(seed, i)
        coeffs[i] = sample_std_complex_gaussian_array(rng, spec.dim)
    rows, _ = monomial_rows(coeffs, spec)
    return rows


def check_agreement(rows: np.ndarray) -> float:
    """Largest root mismatch between the two backends (sorted per trial)."""
    za, *_ = aberth_batch_numba(rows)
    zb, *_ = aberth_batch_numpy(rows)
    worst = 0.0
    for a, b in zip(za, zb):
        a = np.sort_complex(a)
        b = np.sort_complex(b)
        worst = max(worst, float(np.abs(a - b).max() / (1.0 + np.abs(a).max())))
    return worst


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--degrees", type=int, nargs="+", default=[25, 50, 100, 200])
    parser.add_argument("--batch", type=int, default=200)
    parser.add_argument("--output", default=None)
    args = parser.parse_args()

    if not NUMBA_AVAILABLE:
        print("numba backend unavailable (ZEROCOND_DISABLE_NUMBA set or numba "
              "missing); nothing to compare")
        return 1

    # trigger JIT compilation outside the timed region
    aberth_batch_numba(make_batch(8, 2))

    rows_header = f"{'degree':>8} {'batch':>6} {'numba (s)':>12} {'numpy (s)':>12} {'speedup':>9} {'agree':>10}"
    print(rows_header)
    print("-" * len(rows_header))
    results = []
    for degree in args.degrees:
        rows = make_batch(degree, args.batch)
        t0 = time.perf_counter()
        aberth_batch_numba(rows)
        t_nb = time.perf_counter() - t0
        t0 = time.perf_counter()
        aberth_batch_numpy(rows)
        t_np = time.perf_counter() - t0
        agree = check_agreement(make_batch(degree, min(args.batch, 20), seed=1))
        print(f"{degree:>8} {args.batch:>6} {t_nb:>12.3f} {t_np:>12.3f} "
              f"{t_np / t_nb:>8.1f}x {agree:>10.1e}")
        results.append({
            "degree": degree,
            "batch": args.batch,
            "numba_seconds": t_nb,
            "numpy_seconds": t_np,
            "speedup": t_np / t_nb,
            "max_root_mismatch": agree,
        })
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(results, fh, indent=2)
        print(f"wrote {args.output}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
