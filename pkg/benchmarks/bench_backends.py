"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_backends.py [--repeat 3] [--n 6]

The first numba call of each kernel compiles (or loads the on-disk cache);
that call is excluded from the timings.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from favard import buffon, kernels, models, pairs
from favard._accel import HAVE_NUMBA, use_backend


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases(n):
    lay = models.cell_layout(models.FOUR_CORNER, n)
    phis = np.linspace(0.0, np.pi, 256, endpoint=False)
    D, M = models.difference_words(min(n, 5))
    rs = np.random.default_rng(0)
    needle_phi = rs.uniform(0, np.pi, 20000)
    needle_off = rs.uniform(-0.2, 1.6, needle_phi.size)
    return {
        f"projection_stats n={n} x256": lambda: kernels.projection_stats(lay, phis, True),
        f"support only n={n} x256": lambda: kernels.projection_stats(lay, phis, False),
        f"needle_hits n={n} x20000": lambda: buffon.needle_hits("four_corner", n, needle_phi, needle_off),
        f"buffon n={n} x100000": lambda: buffon.buffon_estimate("four_corner", n, 100_000, seed=1).hits,
        f"bucket_table n={min(n, 5)}": lambda: kernels.bucket_table(min(n, 5), D, M)[0],
        f"total_overlap n={min(n, 5)}": lambda: pairs.total_overlap(min(n, 5)).total,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n", type=int, default=6)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    print(f"{'kernel':32s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}  agree")
    for name, fn in cases(args.n).items():
        with use_backend("numba"):
            fn()  # compile / load cache
            t_nb, r_nb = _best(fn, args.repeat)
        with use_backend("numpy"):
            t_np, r_np = _best(fn, args.repeat)
        agree = np.allclose(r_nb, r_np, rtol=1e-12, atol=1e-14, equal_nan=True)
        print(f"{name:32s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f}  {agree}")


if __name__ == "__main__":
    main()
