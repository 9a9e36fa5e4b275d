"""Backend selection for the hot kernels.

The compiled extension is used when it was built; setting the environment
variable ``MOCLUST_PURE_PYTHON=1`` forces the NumPy fallback.
"""

import math
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("MOCLUST_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:  # extension not built
        pass

decode_locus = _impl.decode_locus
connectivity_counts = _impl.connectivity_counts
centroid_spread = _impl.centroid_spread
pareto_ranks = _impl.pareto_ranks
prim_mst = _impl.prim_mst
sq_dists_to = _pykernels.sq_dists_to


def connectivity(labels, ranks, L) -> float:
    """Sum over ranks j of count_j / j, rounded once from the exact rational."""
    counts = connectivity_counts(labels, ranks, L)
    denom = math.lcm(*range(1, L + 1))
    num = sum(int(c) * (denom // (j + 1)) for j, c in enumerate(counts))
    return num / denom


__all__ = [
    "BACKEND",
    "decode_locus",
    "connectivity",
    "connectivity_counts",
    "centroid_spread",
    "pareto_ranks",
    "prim_mst",
    "sq_dists_to",
]
