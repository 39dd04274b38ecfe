#!/usr/bin/env python3
"""Time the modular rank kernel: numba loop against the numpy fallback.

Prints one JSON object per matrix size.  Both paths must return the same
rank, otherwise the script exits with status 1.
"""
import argparse
import json
import sys
import time

import numpy as np

from pwforge.ring import modrank


def best_of(fn, runs):
    best = float("inf")
    out = None
    for _ in range(runs):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 400])
    ap.add_argument("--runs", type=int, default=3)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    have_numba = modrank.numba is not None
    if have_numba:
        # compile outside the timed region
        modrank.rank_mod_p(np.eye(3, dtype=np.int64), use_numba=True)
    status = 0
    for n in args.sizes:
        a = rng.integers(-9, 10, size=(n, n + n // 4)).astype(np.int64)
        a[n // 2] = a[0] - a[1]     # force a rank drop
        t_np, r_np = best_of(lambda: modrank.rank_mod_p(a, use_numba=False), args.runs)
        row = {"rows": n, "cols": a.shape[1], "rank": r_np, "numpy_s": round(t_np, 4)}
        if have_numba:
            t_nb, r_nb = best_of(lambda: modrank.rank_mod_p(a, use_numba=True), args.runs)
            row.update(numba_s=round(t_nb, 4), speedup=round(t_np / t_nb, 2))
            if r_nb != r_np:
                status = 1
                row["mismatch"] = r_nb
        print(json.dumps(row))
    return status


if __name__ == "__main__":
    sys.exit(main())
