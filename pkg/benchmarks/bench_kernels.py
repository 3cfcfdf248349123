"""Time each hot kernel under the numba and numpy backends.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Numba timings exclude the first (compiling) call. Every pair of outputs is
checked for equality before its time is reported.
"""
import argparse
import json
import time

import numpy as np

from juntapac.cube import mask_positions, subset_masks
from juntapac.kernels import backend_module


def workloads(rng):
    d, n = 16, 200_000
    xs = rng.integers(0, 1 << d, n)
    ys = np.where(rng.random(n) < 0.5, 1, -1)
    masks2 = subset_masks(d, 2, "up_to_k")
    masks3 = subset_masks(d, 3)
    pos3 = mask_positions(masks3, 3)
    counts = rng.integers(0, 50, (1820, 1 << 4, 2))
    coeffs = rng.normal(size=masks2.shape[0])
    table = rng.normal(size=1 << 20)
    return {
        "fwht d=20": lambda b: b.fwht(table.copy()),
        "parity 200k x 137": lambda b: b.parity(xs, masks2),
        "restriction_counts 200k x C(16,3)": lambda b: b.restriction_counts(xs, ys, pos3),
        "label_parity_sums 200k x 137": lambda b: b.label_parity_sums(xs, ys, masks2),
        "poly_eval 200k x 137": lambda b: b.poly_eval(xs, masks2, coeffs),
        "truth_table_search 1820 x k=4": lambda b: b.truth_table_search(counts),
    }


def best_of(fn, backend, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(backend)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None)
    args = ap.parse_args()
    fast, slow = backend_module("numba"), backend_module("numpy")
    rows = []
    print(f"{'kernel':38s} {'numpy s':>10s} {'numba s':>10s} {'speedup':>8s}")
    for name, fn in workloads(np.random.default_rng(0)).items():
        fn(fast)  # compile
        t_np, out_np = best_of(fn, slow, args.repeat)
        t_nb, out_nb = best_of(fn, fast, args.repeat)
        for a, b in zip(np.atleast_1d(out_np) if not isinstance(out_np, tuple) else out_np,
                        np.atleast_1d(out_nb) if not isinstance(out_nb, tuple) else out_nb):
            np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-9)
        rows.append({"kernel": name, "numpy": t_np, "numba": t_nb, "speedup": t_np / t_nb})
        print(f"{name:38s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:7.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=1)


if __name__ == "__main__":
    main()
