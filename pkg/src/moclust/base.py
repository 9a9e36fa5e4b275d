"""Single-objective base clusterers and base-partition files.

k-means, Ward linkage and SNN produce the partitions MOCLE starts from and
the single-method baselines; partitions from other tools (HDBSCAN) are read
from text files.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.cluster.hierarchy import cut_tree, linkage
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .dataset import Dataset, DatasetFormatError, NeighborTable, Partition, build_neighbor_table, partition_from_labels

log = logging.getLogger(__name__)

# snn_k values, then eps and min_pts as fractions of snn_k
SNN_K_GRID = (10, 15, 20, 30, 40, 50)
SNN_EPS_FRACTIONS = (0.2, 0.3, 0.4, 0.5, 0.6)
SNN_MINPTS_FRACTIONS = (0.2, 0.4, 0.6, 0.8)


@dataclass
class BaseEntry:
    partition: Partition
    source: str
    params: dict = field(default_factory=dict)


@dataclass
class BasePartitionSet:
    entries: list[BaseEntry] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def partitions(self) -> list[Partition]:
        return [e.partition for e in self.entries]

    def add(self, entry: BaseEntry) -> bool:
        """Append unless an identical co-membership is already present."""
        key = entry.partition.key()
        if any(e.partition.n == entry.partition.n and e.partition.key() == key for e in self.entries):
            return False
        self.entries.append(entry)
        return True

    def extend(self, other: BasePartitionSet) -> None:
        for e in other.entries:
            self.add(e)
        self.warnings.extend(other.warnings)


# ---------------------------------------------------------------- k-means


def _points(ds) -> np.ndarray:
    return ds.points if isinstance(ds, Dataset) else np.asarray(ds, dtype=np.float64)


def _sq_dist_matrix(X, C):
    d = (X * X).sum(axis=1)[:, None] - 2.0 * X @ C.T + (C * C).sum(axis=1)[None, :]
    np.maximum(d, 0.0, out=d)
    return d


def _kmeanspp(X, w, k, rng):
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    first = rng.choice(n, p=w / w.sum())
    centers[0] = X[first]
    closest = _sq_dist_matrix(X, centers[:1])[:, 0]
    for c in range(1, k):
        prob = w * closest
        total = prob.sum()
        idx = rng.choice(n, p=prob / total) if total > 0 else rng.integers(n)
        centers[c] = X[idx]
        np.minimum(closest, _sq_dist_matrix(X, centers[c : c + 1])[:, 0], out=closest)
    return centers


def lloyd(X, k, rng, weights=None, max_iter=100, history=None):
    """One weighted Lloyd run from a k-means++ start.

    Returns ``(labels, centroids, sse)``. An empty cluster seizes the point
    farthest from its current centroid. If ``history`` is a list, the SSE
    after every assignment step is appended to it.
    """
    n = X.shape[0]
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)
    C = _kmeanspp(X, w, k, rng)
    labels = None
    for _ in range(max_iter):
        D = _sq_dist_matrix(X, C)
        new = D.argmin(axis=1)
        counts = np.bincount(new, minlength=k)
        while (counts == 0).any():
            empty = int(np.flatnonzero(counts == 0)[0])
            donors = np.flatnonzero(counts[new] > 1)
            far = int(donors[D[donors, new[donors]].argmax()])
            counts[new[far]] -= 1
            new[far] = empty
            counts[empty] += 1
            C[empty] = X[far]
            D[:, empty] = _sq_dist_matrix(X, X[far : far + 1])[:, 0]
        if history is not None:
            history.append(float((w * D[np.arange(n), new]).sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for c in range(k):
            m = labels == c
            C[c] = np.average(X[m], axis=0, weights=w[m])
    resid = X - C[labels]
    sse = float((w * np.einsum("ij,ij->i", resid, resid)).sum())
    return labels, C, sse


def kmeans(ds, k: int, restarts: int = 10, max_iter: int = 100, rng=None, weights=None) -> Partition:
    """Best-of-``restarts`` Lloyd k-means (squared Euclidean)."""
    X = _points(ds)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}")
    rng = np.random.default_rng(rng)
    if k == n:
        return Partition(np.arange(n))
    best = None
    for _ in range(max(1, restarts)):
        labels, _, sse = lloyd(X, k, rng, weights=weights, max_iter=max_iter)
        if best is None or sse < best[1]:
            best = (labels, sse)
    return partition_from_labels(best[0])


# ---------------------------------------------------------------- Ward


def ward_tree(ds) -> np.ndarray:
    return linkage(_points(ds), method="ward", metric="euclidean")


def ward_cut(Z: np.ndarray, k: int) -> Partition:
    return partition_from_labels(cut_tree(Z, n_clusters=k).ravel())


def ward_linkage(ds, k: int) -> Partition:
    n = _points(ds).shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}")
    return ward_cut(ward_tree(ds), k)


# ---------------------------------------------------------------- SNN


def snn_similarity(nn: NeighborTable, snn_k: int) -> csr_matrix:
    """Shared-neighbor counts for mutual snn_k-neighbor pairs (sparse, symmetric)."""
    if snn_k > nn.L_max:
        raise ValueError(f"snn_k={snn_k} exceeds neighbor table depth {nn.L_max}")
    n = nn.ranks.shape[0]
    rows = np.repeat(np.arange(n), snn_k)
    M = csr_matrix((np.ones(rows.size), (rows, nn.ranks[:, :snn_k].ravel())), shape=(n, n))
    mutual = M.multiply(M.T)
    return csr_matrix((M @ M.T).multiply(mutual))


def snn_cluster(ds, nn: NeighborTable, snn_k: int, eps: float, min_pts: int, sim=None) -> Partition:
    """Density-based shared-nearest-neighbor clustering.

    Core points have at least ``min_pts`` mutual neighbors with similarity
    >= ``eps``; cores linked at >= ``eps`` form clusters; other points join
    their most similar core when that similarity reaches ``eps`` and are
    otherwise left as singletons.
    """
    S = snn_similarity(nn, snn_k) if sim is None else sim
    n = S.shape[0]
    S = S.tocoo()
    strong = S.data >= eps
    I, J, V = S.row[strong], S.col[strong], S.data[strong]
    density = np.bincount(I, minlength=n)
    core = density >= min_pts
    labels = np.full(n, -1, dtype=np.int64)
    if core.any():
        cc = core[I] & core[J]
        g = csr_matrix((np.ones(cc.sum()), (I[cc], J[cc])), shape=(n, n))
        _, comp = connected_components(g, directed=False)
        labels[core] = comp[core]
        # border points: most similar core, ties to the lower core index
        bm = ~core[I] & core[J]
        if bm.any():
            bi, bj, bv = I[bm], J[bm], V[bm]
            order = np.lexsort((bj, -bv, bi))
            bi, bj = bi[order], bj[order]
            first = np.r_[True, bi[1:] != bi[:-1]]
            labels[bi[first]] = labels[bj[first]]
    loose = np.flatnonzero(labels < 0)
    labels[loose] = labels.max() + 1 + np.arange(loose.size)
    return partition_from_labels(labels)


def snn_grid(n: int):
    for snn_k in SNN_K_GRID:
        if snn_k > n - 1:
            continue
        for fe, fm in itertools.product(SNN_EPS_FRACTIONS, SNN_MINPTS_FRACTIONS):
            yield snn_k, max(1, round(fe * snn_k)), max(1, round(fm * snn_k))


# ---------------------------------------------------------------- sweeps and files


def sweep_base_partitions(
    ds: Dataset,
    k_star: int | None = None,
    rng=None,
    methods=("kmeans", "ward", "snn"),
    restarts: int = 10,
    nn: NeighborTable | None = None,
) -> BasePartitionSet:
    """All in-range partitions from the built-in clusterers, deduplicated."""
    k_star = ds.k_star if k_star is None else k_star
    if k_star is None:
        raise ValueError("the sweep needs k* (dataset labels or an explicit value)")
    rng = np.random.default_rng(rng)
    k_hi = min(2 * k_star, ds.n)
    ks = range(2, k_hi + 1)
    out = BasePartitionSet()
    for method in methods:
        found = 0
        if method == "kmeans":
            for k in ks:
                out.add(BaseEntry(kmeans(ds, k, restarts=restarts, rng=rng), "kmeans", {"k": k}))
                found += 1
        elif method == "ward":
            Z = ward_tree(ds)
            for k in ks:
                out.add(BaseEntry(ward_cut(Z, k), "ward", {"k": k}))
                found += 1
        elif method == "snn":
            depth = min(max(SNN_K_GRID), ds.n - 1)
            if nn is None or nn.L_max < depth:
                nn = build_neighbor_table(ds, depth)
            sims = {}
            for snn_k, eps, min_pts in snn_grid(ds.n):
                if snn_k not in sims:
                    sims[snn_k] = snn_similarity(nn, snn_k)
                p = snn_cluster(ds, nn, snn_k, eps, min_pts, sim=sims[snn_k])
                if 2 <= p.k <= k_hi:
                    found += 1
                    out.add(BaseEntry(p, "snn", {"snn_k": snn_k, "eps": eps, "min_pts": min_pts}))
        else:
            raise ValueError(f"unknown base clusterer {method!r}")
        if not found:
            msg = f"{method}: no partition with k in [2, {k_hi}] on {ds.name}"
            log.warning(msg)
            out.warnings.append(msg)
    return out


def ingest_partitions(path, n: int | None = None) -> BasePartitionSet:
    """Read one partition per line (space-separated integer labels)."""
    out = BasePartitionSet()
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields:
                continue
            if n is None:
                n = len(fields)
            if len(fields) != n:
                raise DatasetFormatError(f"{path}:{lineno}: expected {n} labels, got {len(fields)}")
            try:
                labels = [int(x) for x in fields]
            except ValueError:
                raise DatasetFormatError(f"{path}:{lineno}: non-integer label") from None
            out.add(BaseEntry(partition_from_labels(labels), "external", {"file": str(path), "line": lineno}))
    return out


def export_partitions(base: BasePartitionSet, path) -> None:
    with open(path, "w") as fh:
        for e in base.entries:
            fh.write(" ".join(map(str, e.partition.assign.tolist())) + "\n")
