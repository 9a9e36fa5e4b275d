"""Clustering phases of MOCK, Delta-MOCK and MOCLE on one dataset."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .base import BasePartitionSet, sweep_base_partitions
from .dataset import Dataset, NeighborTable, build_neighbor_table
from .graph import MstModel, build_mst, compute_di, gamma_size_heuristic, init_delta_mock, init_mock, split_links
from .mocle import run_mocle
from .moea import ApproximationSet, graph_variation, run_nsga2, run_pesa2
from .objectives import Evaluator

# Engine defaults; the ones listed in RECONSTRUCTED are engineering choices and are
# reported as such in run metadata.
MOCK_DEFAULTS = {
    "init_size": 100,
    "generations": 500,
    "internal_size": 10,
    "archive_cap": 1000,
    "grid_divisions": 10,
    "crossover_prob": 0.7,
}
DELTA_MOCK_DEFAULTS = {
    "pop_size": 100,
    "generations": 100,
    "crossover_prob": 0.7,
    "delta_mode": "redirect",
}
MOCLE_DEFAULTS = {
    "generations": 50,
}
RECONSTRUCTED = {
    "mock": sorted(MOCK_DEFAULTS),
    "delta-mock": sorted(DELTA_MOCK_DEFAULTS),
    "mocle": sorted(MOCLE_DEFAULTS) + ["snn_grid", "kmeans_restarts"],
}


@dataclass
class Workspace:
    """Per-dataset caches shared by every run: neighbor table and MST."""

    ds: Dataset
    L: int = 10
    nn: NeighborTable = field(init=False)
    mst: MstModel = field(init=False)

    def __post_init__(self):
        self.nn = build_neighbor_table(self.ds, min(self.L, self.ds.n - 1))
        self.mst = compute_di(build_mst(self.ds), self.nn)

    def delta_mst(self, gamma_size: int | None = None) -> MstModel:
        size = gamma_size_heuristic(self.ds.n) if gamma_size is None else gamma_size
        return split_links(self.mst, size)


def run_mock(ws: Workspace, k_max: int, rng, params: dict | None = None, trace=None, on_generation=None) -> ApproximationSet:
    p = {**MOCK_DEFAULTS, **(params or {})}
    rng = np.random.default_rng(rng)
    init = init_mock(ws.ds, ws.mst, ws.nn, p["init_size"], k_max, rng)
    ops = graph_variation(ws.nn, ws.L, p.get("mutation_rate"), p["crossover_prob"])
    out = run_pesa2(init, Evaluator("mock", ws.ds, ws.nn, ws.L), ops, generations=p["generations"],
                    internal_size=p["internal_size"], archive_cap=p["archive_cap"],
                    grid_divisions=p["grid_divisions"], rng=rng, trace=trace, on_generation=on_generation)
    out.run_meta.update({"algorithm": "mock", "L": ws.L, "k_max": k_max, "init": init.meta,
                         "params": p, "reconstructed": RECONSTRUCTED["mock"]})
    return out


def run_delta_mock(ws: Workspace, rng, params: dict | None = None, trace=None, on_generation=None) -> ApproximationSet:
    p = {**DELTA_MOCK_DEFAULTS, **(params or {})}
    rng = np.random.default_rng(rng)
    mst = ws.delta_mst(p.get("gamma_size"))
    init = init_delta_mock(mst, p["pop_size"], rng)
    ops = graph_variation(ws.nn, ws.L, p.get("mutation_rate"), p["crossover_prob"], p["delta_mode"])
    out = run_nsga2(init, Evaluator("delta-mock", ws.ds, ws.nn, ws.L), ops, generations=p["generations"],
                    pop_size=p["pop_size"], rng=rng, trace=trace, on_generation=on_generation)
    out.run_meta.update({"algorithm": "delta-mock", "L": ws.L, "gamma_size": int(mst.gamma.size),
                         "init": init.meta, "params": p, "reconstructed": RECONSTRUCTED["delta-mock"]})
    return out


def run_mocle_on(ws: Workspace, base: BasePartitionSet, rng, params: dict | None = None, trace=None) -> ApproximationSet:
    p = {**MOCLE_DEFAULTS, **(params or {})}
    out = run_mocle(base, ws.ds, ws.nn, ws.L, generations=p["generations"], rng=rng, trace=trace)
    out.run_meta.update({"params": p, "reconstructed": RECONSTRUCTED["mocle"]})
    return out


def default_base(ws: Workspace, k_star: int, rng, extra: BasePartitionSet | None = None) -> BasePartitionSet:
    base = sweep_base_partitions(ws.ds, k_star, rng=rng)
    if extra is not None:
        base.extend(extra)
    return base
