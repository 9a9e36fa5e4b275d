"""NumPy/SciPy implementations of the hot kernels.

Used when the compiled ``_ckernels`` extension is unavailable or when
``MOCLUST_PURE_PYTHON`` is set. Every function here has a twin with the same
signature and semantics in ``_ckernels.pyx``.
"""

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


def decode_locus(genes):
    """Connected components of the graph {i, genes[i]}.

    Returns ``(labels, k)`` with labels numbered in order of each
    component's smallest member.
    """
    genes = np.asarray(genes, dtype=np.int64)
    n = genes.shape[0]
    if n and (genes.min() < 0 or genes.max() >= n):
        raise ValueError("gene out of range")
    adj = coo_matrix((np.ones(n, dtype=np.int8), (np.arange(n), genes)), shape=(n, n))
    k, raw = connected_components(adj, directed=False)
    return _first_occurrence(raw, k), int(k)


def _first_occurrence(raw, k):
    order = np.full(k, -1, dtype=np.int64)
    _, first = np.unique(raw, return_index=True)
    # first[c] is the smallest member of raw component c
    order[np.argsort(first, kind="stable")] = np.arange(k)
    return order[raw]


def connectivity_counts(labels, ranks, L):
    """Number of points whose j-th neighbor lies in another cluster, j = 1..L."""
    labels = np.asarray(labels)
    nbr = labels[ranks[:, :L]]
    return (nbr != labels[:, None]).sum(axis=0).astype(np.int64)


def centroid_spread(points, labels, k):
    """Return ``(sum of distances to centroid, sum of squared distances)``."""
    labels = np.asarray(labels, dtype=np.int64)
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    sums = np.zeros((k, points.shape[1]))
    np.add.at(sums, labels, points)
    centroids = sums / counts[:, None]
    diff = points - centroids[labels]
    sq = np.einsum("ij,ij->i", diff, diff)
    return float(np.sqrt(sq).sum()), float(sq.sum())


def pareto_ranks(F):
    """Front index of every row of an (m, 2+) objective matrix (minimization)."""
    F = np.asarray(F, dtype=np.float64)
    m = F.shape[0]
    le = (F[:, None, :] <= F[None, :, :]).all(axis=2)
    lt = (F[:, None, :] < F[None, :, :]).any(axis=2)
    dom = le & lt  # dom[p, q]: p dominates q
    count = dom.sum(axis=0)
    ranks = np.full(m, -1, dtype=np.int64)
    current = np.flatnonzero(count == 0)
    front = 0
    while current.size:
        ranks[current] = front
        count = count - dom[current].sum(axis=0)
        count[ranks >= 0] = -1
        current = np.flatnonzero(count == 0)
        front += 1
    return ranks


def prim_mst(points):
    """Exact Euclidean MST by Prim's algorithm from point 0.

    Distances are computed row by row. Among equal-weight candidates the edge
    with the lexicographically smallest (min endpoint, max endpoint) wins.
    Returns ``(parent, weight)``; ``parent[0] == 0``.
    """
    X = np.ascontiguousarray(points, dtype=np.float64)
    n = X.shape[0]
    parent = np.zeros(n, dtype=np.int64)
    weight = np.zeros(n)
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    key = _row_dist(X, 0)
    lo = np.zeros(n, dtype=np.int64)  # min(parent, v) for current best edge
    hi = np.arange(n, dtype=np.int64)
    key[0] = np.inf
    for _ in range(n - 1):
        cand_key = np.where(in_tree, np.inf, key)
        best = cand_key.min()
        cand = np.flatnonzero(cand_key == best)
        if cand.size > 1:
            cand = cand[np.lexsort((hi[cand], lo[cand]))]
        v = cand[0]
        in_tree[v] = True
        weight[v] = key[v]
        d = _row_dist(X, v)
        idx = np.arange(n)
        new_lo = np.minimum(idx, v)
        new_hi = np.maximum(idx, v)
        better = d < key
        tie = (d == key) & ((new_lo < lo) | ((new_lo == lo) & (new_hi < hi)))
        upd = (better | tie) & ~in_tree
        key[upd] = d[upd]
        parent[upd] = v
        lo[upd] = new_lo[upd]
        hi[upd] = new_hi[upd]
    return parent, weight


def _row_dist(X, i):
    return np.sqrt(sq_dists_to(X, X[i]))


def sq_dists_to(X, x):
    """Squared distances from every row of X to x, summed dimension by dimension.

    The summation order matches the compiled kernel so both backends see the
    same floating-point values (and therefore the same ties).
    """
    acc = np.zeros(X.shape[0])
    for j in range(X.shape[1]):
        t = X[:, j] - x[j]
        acc += t * t
    return acc
