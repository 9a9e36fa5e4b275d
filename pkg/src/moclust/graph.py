"""Minimum spanning tree, degree of interestingness and initial populations.

Edges of the tree are identified by their child node: edge ``i`` joins
``i`` and ``parent[i]``. Node 0 is the root and has no edge.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .base import kmeans
from .dataset import Dataset, NeighborTable
from .encoding import Genotype, encode_mst_full, remove_links
from .kernels import prim_mst


@dataclass(frozen=True, eq=False)
class MstModel:
    parent: np.ndarray
    edge_weight: np.ndarray
    di: np.ndarray | None = None
    gamma: np.ndarray | None = None  # child ids of relevant edges, ascending
    delta_fixed: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.parent.size

    @property
    def edges(self) -> np.ndarray:
        """Child ids of all non-root edges."""
        return np.flatnonzero(self.parent != np.arange(self.n))

    def total_weight(self) -> float:
        return float(self.edge_weight.sum())

    def edge_pairs(self) -> list[tuple[int, int]]:
        return [(int(min(i, self.parent[i])), int(max(i, self.parent[i]))) for i in self.edges]


@dataclass
class InitialPopulation:
    genotypes: list[Genotype]
    provenance: list[str]
    meta: dict

    def __len__(self):
        return len(self.genotypes)


def build_mst(ds: Dataset) -> MstModel:
    parent, weight = prim_mst(ds.points)
    parent = np.asarray(parent, dtype=np.int64)
    parent.setflags(write=False)
    weight = np.asarray(weight)
    weight.setflags(write=False)
    return MstModel(parent, weight)


def compute_di(mst: MstModel, nn: NeighborTable) -> MstModel:
    """Degree of interestingness of each edge.

    ``di(i, j) = min(rank of j among i's neighbors, rank of i among j's)``,
    ranks 1-based and ``L_max + 1`` when absent. The root entry is 0.
    """
    n, L = nn.ranks.shape
    # rank_lookup[a, b] would be O(n^2); search each edge's two rows instead
    di = np.zeros(n, dtype=np.int64)
    for i in mst.edges:
        j = mst.parent[i]
        di[i] = min(_rank(nn.ranks[i], j, L), _rank(nn.ranks[j], i, L))
    di.setflags(write=False)
    return replace(mst, di=di)


def _rank(row, target, L):
    hit = np.flatnonzero(row == target)
    return int(hit[0]) + 1 if hit.size else L + 1


def interesting_order(mst: MstModel) -> np.ndarray:
    """Edges by decreasing DI, then longer edge, then lower edge id."""
    e = mst.edges
    order = np.lexsort((e, -mst.edge_weight[e], -mst.di[e]))
    return e[order]


def split_links(mst: MstModel, target_gamma_size: int) -> MstModel:
    if mst.di is None:
        raise ValueError("compute_di must run before split_links")
    if not 0 <= target_gamma_size <= mst.n - 1:
        raise ValueError(f"target_gamma_size must be in 0..{mst.n - 1}")
    ranked = interesting_order(mst)
    gamma = np.sort(ranked[:target_gamma_size])
    fixed = np.sort(ranked[target_gamma_size:])
    gamma.setflags(write=False)
    fixed.setflags(write=False)
    return replace(mst, gamma=gamma, delta_fixed=fixed)


def gamma_size_heuristic(n: int) -> int:
    if n < 2:
        raise ValueError("n must be >= 2")
    return min(n - 1, int(math.floor(5.0 * math.sqrt(n) + 0.5)))


def phase1_individual(mst: MstModel, k: int, rng) -> Genotype:
    """Cut the k-1 highest-DI links; equal-DI candidates are shuffled."""
    e = mst.edges
    order = e[np.lexsort((rng.permutation(e.size), -mst.di[e]))]
    return remove_links(mst, "locus", order[: k - 1])


def phase2_individual(ds: Dataset, mst: MstModel, k: int, rng) -> Genotype:
    """Cut every MST link whose endpoints k-means puts in different clusters."""
    assign = kmeans(ds, k, restarts=1, rng=rng).assign
    e = mst.edges
    crossing = e[assign[e] != assign[mst.parent[e]]]
    return remove_links(mst, "locus", crossing)


def init_mock(ds: Dataset, mst: MstModel, nn: NeighborTable, pop_size: int, k_max: int, rng) -> InitialPopulation:
    if pop_size < 2:
        raise ValueError("pop_size must be >= 2")
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    if mst.di is None:
        mst = compute_di(mst, nn)
    k_max = min(k_max, ds.n)
    n_phase1 = pop_size - pop_size // 2
    genotypes, prov = [], []
    for _ in range(n_phase1):
        genotypes.append(phase1_individual(mst, int(rng.integers(2, k_max + 1)), rng))
        prov.append("mst-removal")
    for _ in range(pop_size - n_phase1):
        genotypes.append(phase2_individual(ds, mst, int(rng.integers(2, k_max + 1)), rng))
        prov.append("kmeans-boundary")
    meta = {
        "phase_split": f"{n_phase1}/{pop_size - n_phase1}",
        "phase1_rule": "cut k-1 highest-DI links, random order among equal DI",
        "k_range": [2, k_max],
    }
    return InitialPopulation(genotypes, prov, meta)


def init_delta_mock(mst: MstModel, pop_size: int, rng) -> InitialPopulation:
    if mst.gamma is None or mst.gamma.size == 0:
        raise ValueError("init_delta_mock needs a non-empty gamma set")
    gamma = mst.gamma
    genotypes = [encode_mst_full(mst, "delta-locus")]
    for _ in range(pop_size - 1):
        size = int(rng.integers(1, gamma.size + 1))
        cut = rng.choice(gamma, size=size, replace=False)
        genotypes.append(remove_links(mst, "delta-locus", np.sort(cut)))
    prov = ["mst-removal"] * len(genotypes)
    meta = {"sampling": "subset size uniform in 1..|gamma|, subset uniform"}
    return InitialPopulation(genotypes, prov, meta)


def dump_mst_csv(mst: MstModel, path) -> None:
    in_gamma = np.zeros(mst.n, dtype=bool)
    if mst.gamma is not None:
        in_gamma[mst.gamma] = True
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["edge_src", "edge_dst", "weight", "di", "in_gamma"])
        for i in mst.edges:
            di = "" if mst.di is None else int(mst.di[i])
            w.writerow([int(i), int(mst.parent[i]), repr(float(mst.edge_weight[i])), di, int(in_gamma[i])])
