"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--n 2000] [--repeat 5] [--end-to-end]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from moclust import _pykernels

try:
    from moclust import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases(n, rng):
    X = rng.normal(size=(n, 2))
    ranks = np.argsort(((X[:, None] - X[None]) ** 2).sum(-1), axis=1)[:, 1:11]
    genes = rng.integers(0, n, size=n)
    labels = rng.integers(0, 10, size=n)
    F = rng.random((min(n, 400), 2))
    return {
        "decode_locus": lambda m: m.decode_locus(genes),
        "connectivity_counts": lambda m: m.connectivity_counts(labels, ranks, 10),
        "centroid_spread": lambda m: m.centroid_spread(X, labels, 10),
        "pareto_ranks": lambda m: m.pareto_ranks(F),
        "prim_mst": lambda m: m.prim_mst(X),
    }


E2E = """
import time, numpy as np
from moclust import BACKEND
from moclust.algorithms import Workspace, run_delta_mock
from moclust.synthetic import mixed_shapes
ws = Workspace(mixed_shapes(rng=0))
t = time.perf_counter()
run_delta_mock(ws, np.random.default_rng(1))
print(BACKEND, time.perf_counter() - t)
"""


def end_to_end():
    """One default Delta-MOCK run on n=588 under each backend."""
    for pure in ("", "1"):
        env = dict(os.environ, MOCLUST_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True, text=True, check=True)
        backend, secs = out.stdout.split()
        print(f"delta-mock run, {backend:<7} backend: {float(secs):.2f} s")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true", help="also time a full run per backend")
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, fn in cases(args.n, rng).items():
        t_py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print(f"{name:<22}{t_py:>12.2f}{'n/a':>12}")
            continue
        t_c = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<22}{t_py:>12.2f}{t_c:>12.2f}{t_py / t_c:>9.1f}x")
    if args.end_to_end:
        end_to_end()


if __name__ == "__main__":
    main()
