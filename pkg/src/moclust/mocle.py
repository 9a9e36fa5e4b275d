"""MOCLE: NSGA-II over base partitions with HBGF ensemble crossover."""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from .base import BasePartitionSet, lloyd
from .dataset import Dataset, NeighborTable, Partition, partition_from_labels
from .encoding import encode_partition
from .moea import ApproximationSet, Individual, Variation, run_nsga2
from .objectives import Evaluator

log = logging.getLogger(__name__)


def bipartite_adjacency(a: Partition, b: Partition) -> np.ndarray:
    """Point-by-cluster incidence of both parents (n x (k_a + k_b), unit weights)."""
    if a.n != b.n:
        raise ValueError("parents cover different point counts")
    A = np.zeros((a.n, a.k + b.k))
    A[np.arange(a.n), a.assign] = 1.0
    A[np.arange(a.n), a.k + b.assign] = 1.0
    return A


def hbgf_crossover(a: Partition, b: Partition, k_child: int, rng, restarts: int = 3,
                   points: np.ndarray | None = None) -> Partition:
    """Fuse two partitions by spectral partitioning of their bipartite graph.

    Points sharing both parents' labels are indistinguishable in the graph,
    so the embedding and k-means run on those groups, weighted by size.
    When ``k_child`` exceeds the number of groups the largest groups are
    split (2-means on ``points`` when given, else by index halves).
    """
    if a.n != b.n:
        raise ValueError("parents cover different point counts")
    if not 2 <= k_child <= a.n:
        raise ValueError(f"k_child must be in 2..{a.n}")
    rng = np.random.default_rng(rng)
    code = a.assign * b.k + b.assign
    uniq, group = np.unique(code, return_inverse=True)
    group = group.ravel()
    G = uniq.size
    if k_child > G:
        log.warning("hbgf: k_child=%d exceeds %d co-membership groups; splitting largest groups", k_child, G)
        return _split_largest(group, k_child, points, rng)
    weight = np.bincount(group, minlength=G).astype(np.float64)
    ga, gb = uniq // b.k, uniq % b.k
    # normalized incidence D1^-1/2 A D2^-1/2: every point has degree 2
    R = np.zeros((G, a.k + b.k))
    R[np.arange(G), ga] = 1.0 / np.sqrt(2.0 * a.sizes()[ga])
    R[np.arange(G), a.k + gb] = 1.0 / np.sqrt(2.0 * b.sizes()[gb])
    _, S, Vt = np.linalg.svd(R * np.sqrt(weight)[:, None], full_matrices=False)
    keep = min(k_child, int((S > 1e-12 * S[0]).sum()))
    emb = R @ Vt[:keep].T / S[:keep]
    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    emb = emb / np.where(norms > 0, norms, 1.0)
    best = None
    for _ in range(restarts):
        labels, _, sse = lloyd(emb, k_child, rng, weights=weight)
        if best is None or sse < best[1]:
            best = (labels, sse)
    return partition_from_labels(best[0][group])


def _split_largest(group, k_child, points, rng) -> Partition:
    labels = group.copy()
    k = int(labels.max()) + 1
    while k < k_child:
        sizes = np.bincount(labels, minlength=k)
        big = int(sizes.argmax())
        members = np.flatnonzero(labels == big)
        if members.size < 2:
            break
        if points is not None:
            sub, _, _ = lloyd(points[members], 2, rng)
            moved = members[sub == 1]
            if moved.size == 0 or moved.size == members.size:
                moved = members[members.size // 2:]
        else:
            moved = members[members.size // 2:]
        labels[moved] = k
        k += 1
    return partition_from_labels(labels)


def mocle_variation(rng_restarts: int = 3, child_log: list | None = None) -> Variation:
    """HBGF crossover with k_child uniform between the parents' k; no mutation."""

    def cross(a: Individual, b: Individual, rng):
        lo, hi = sorted((a.partition.k, b.partition.k))
        k_child = int(rng.integers(lo, hi + 1))
        if k_child < 2:
            # both parents are single-cluster partitions
            child = a.partition
        else:
            child = hbgf_crossover(a.partition, b.partition, k_child, rng, restarts=rng_restarts)
        if child_log is not None:
            child_log.append((a.partition.k, b.partition.k, k_child, child.k))
        return encode_partition(child)

    return Variation(cross, None, crossover_prob=1.0)


def run_mocle(
    base: BasePartitionSet | Sequence[Partition],
    ds: Dataset,
    nn: NeighborTable,
    L: int = 10,
    generations: int = 50,
    rng=None,
    on_generation=None,
    trace: list | None = None,
    child_log: list | None = None,
) -> ApproximationSet:
    parts = base.partitions if isinstance(base, BasePartitionSet) else list(base)
    if len(parts) == 0:
        raise ValueError("MOCLE needs base partitions")
    if len(parts) < 2:
        log.warning("MOCLE started from a single base partition")
    init = [encode_partition(p) for p in parts]
    ops = mocle_variation(child_log=child_log)
    evaluator = Evaluator("mocle", ds, nn, L)
    result = run_nsga2(init, evaluator, ops, generations=generations, pop_size=len(init),
                       rng=rng, on_generation=on_generation, trace=trace)
    result.run_meta.update({"algorithm": "mocle", "base_size": len(parts), "L": L,
                            "crossover": "hbgf-spectral"})
    return result
