"""Clustering criteria, all minimized: overall deviation, connectivity, variance."""

from __future__ import annotations

from dataclasses import dataclass

from .dataset import Dataset, NeighborTable, Partition
from .encoding import Genotype, decode
from .kernels import centroid_spread, connectivity

ALGORITHMS = ("mock", "delta-mock", "mocle")
_KIND_FOR = {"mock": "locus", "mocle": "locus", "delta-mock": "delta-locus"}


@dataclass(frozen=True)
class ObjectivePair:
    compactness: float
    connectedness: float
    labels: tuple[str, str] = ("dev", "con")

    def as_tuple(self) -> tuple[float, float]:
        return (self.compactness, self.connectedness)


def dev(p: Partition, ds: Dataset) -> float:
    """Summed Euclidean distance of every point to its cluster centroid."""
    _check_cover(p, ds)
    return centroid_spread(ds.points, p.assign, p.k)[0]


def var(p: Partition, ds: Dataset) -> float:
    """Mean squared Euclidean distance to the cluster centroid."""
    _check_cover(p, ds)
    return centroid_spread(ds.points, p.assign, p.k)[1] / ds.n


def con(p: Partition, nn: NeighborTable, L: int = 10) -> float:
    """Penalty 1/j for each point whose j-th neighbor (j <= L) is in another cluster."""
    if not 1 <= L <= nn.L_max:
        raise ValueError(f"L={L} outside neighbor table depth {nn.L_max}")
    return connectivity(p.assign, nn.ranks, L)


def _check_cover(p, ds):
    if p.n != ds.n:
        raise ValueError(f"partition covers {p.n} points, dataset has {ds.n}")


def evaluate_partition(p: Partition, algo: str, ds: Dataset, nn: NeighborTable, L: int = 10) -> ObjectivePair:
    spread, sq = centroid_spread(ds.points, p.assign, p.k)
    c = con(p, nn, L)
    if algo == "delta-mock":
        return ObjectivePair(sq / ds.n, c, ("var", "con"))
    if algo in ("mock", "mocle"):
        return ObjectivePair(spread, c, ("dev", "con"))
    raise ValueError(f"unknown algorithm {algo!r}")


def evaluate(g: Genotype, algo: str, ds: Dataset, nn: NeighborTable, L: int = 10) -> ObjectivePair:
    if algo not in _KIND_FOR:
        raise ValueError(f"unknown algorithm {algo!r}")
    if g.kind != _KIND_FOR[algo]:
        raise ValueError(f"{algo} expects {_KIND_FOR[algo]} genotypes, got {g.kind}")
    return evaluate_partition(decode(g), algo, ds, nn, L)


class Evaluator:
    """Genotype -> (ObjectivePair, Partition) for one algorithm and dataset."""

    def __init__(self, algo: str, ds: Dataset, nn: NeighborTable, L: int = 10):
        if algo not in _KIND_FOR:
            raise ValueError(f"unknown algorithm {algo!r}")
        self.algo, self.ds, self.nn, self.L = algo, ds, nn, L
        self.calls = 0

    def __call__(self, g: Genotype):
        if g.kind != _KIND_FOR[self.algo]:
            raise ValueError(f"{self.algo} expects {_KIND_FOR[self.algo]} genotypes, got {g.kind}")
        self.calls += 1
        p = decode(g)
        return evaluate_partition(p, self.algo, self.ds, self.nn, self.L), p
