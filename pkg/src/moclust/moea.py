"""NSGA-II and PESA-II over genotypes, plus the shared variation operators.

Both engines minimize a pair of objectives. An evaluator maps a genotype to
``(ObjectivePair, Partition)``; variation is supplied as a :class:`Variation`
so the same loops drive MOCK, Delta-MOCK and MOCLE.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dataset import NeighborTable, Partition
from .encoding import Genotype
from .kernels import pareto_ranks
from .objectives import ObjectivePair


@dataclass
class Individual:
    genotype: Genotype
    objectives: ObjectivePair
    partition: Partition
    rank: int = 0
    crowding: float = 0.0

    @property
    def f(self) -> tuple[float, float]:
        return self.objectives.as_tuple()


@dataclass
class ApproximationSet:
    members: list[Individual]
    run_meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def partitions(self) -> list[Partition]:
        return [m.partition for m in self.members]

    def objective_matrix(self) -> np.ndarray:
        return np.array([m.f for m in self.members], dtype=np.float64).reshape(-1, 2)


@dataclass
class Variation:
    crossover: Callable | None  # (Individual, Individual, rng) -> Genotype
    mutate: Callable | None  # (Genotype, rng) -> Genotype
    crossover_prob: float = 0.7
    calls: dict = field(default_factory=lambda: {"crossover": 0, "mutate": 0})

    def offspring(self, select: Callable[[], Individual], rng) -> Genotype:
        a = select()
        if self.crossover is not None and rng.random() < self.crossover_prob:
            b = select()
            self.calls["crossover"] += 1
            child = self.crossover(a, b, rng)
        else:
            child = a.genotype
        if self.mutate is not None:
            self.calls["mutate"] += 1
            child = self.mutate(child, rng)
        return child


# ---------------------------------------------------------------- dominance


def dominates(a, b) -> bool:
    a = a.as_tuple() if isinstance(a, ObjectivePair) else tuple(a)
    b = b.as_tuple() if isinstance(b, ObjectivePair) else tuple(b)
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def _objective_matrix(pop) -> np.ndarray:
    if len(pop) and isinstance(pop[0], Individual):
        return np.array([ind.f for ind in pop], dtype=np.float64)
    return np.asarray(pop, dtype=np.float64).reshape(len(pop), -1)


def nondominated_sort(pop) -> list[list[int]]:
    """Index lists of successive Pareto fronts; sets ``rank`` on Individuals."""
    if len(pop) == 0:
        raise ValueError("cannot sort an empty population")
    ranks = pareto_ranks(_objective_matrix(pop))
    fronts = [list(map(int, np.flatnonzero(ranks == r))) for r in range(int(ranks.max()) + 1)]
    if isinstance(pop[0], Individual):
        for ind, r in zip(pop, ranks):
            ind.rank = int(r)
    return fronts


def crowding_distance(front: Sequence[int], pop) -> np.ndarray:
    """Crowding distance of each member of ``front`` (same order)."""
    if len(front) == 0:
        raise ValueError("empty front")
    F = _objective_matrix(pop)[list(front)]
    m, nobj = F.shape
    dist = np.zeros(m)
    if m <= 2:
        dist[:] = np.inf
        return dist
    for o in range(nobj):
        order = np.argsort(F[:, o], kind="stable")
        vals = F[order, o]
        dist[order[0]] = dist[order[-1]] = np.inf
        span = vals[-1] - vals[0]
        if span > 0:
            dist[order[1:-1]] += (vals[2:] - vals[:-2]) / span
    return dist


def assign_rank_crowding(pop: list[Individual]) -> list[list[int]]:
    fronts = nondominated_sort(pop)
    for fr in fronts:
        for idx, c in zip(fr, crowding_distance(fr, pop)):
            pop[idx].crowding = float(c)
    return fronts


def _better(a: Individual, ia: int, b: Individual, ib: int) -> bool:
    if a.rank != b.rank:
        return a.rank < b.rank
    if a.crowding != b.crowding:
        return a.crowding > b.crowding
    return ia < ib


def binary_tournament(pop: list[Individual], rng) -> Individual:
    i, j = (int(x) for x in rng.integers(0, len(pop), size=2))
    return pop[i] if _better(pop[i], i, pop[j], j) else pop[j]


def environmental_selection(pool: list[Individual], size: int) -> list[Individual]:
    fronts = assign_rank_crowding(pool)
    chosen: list[int] = []
    for fr in fronts:
        if len(chosen) + len(fr) <= size:
            chosen.extend(fr)
            continue
        crowd = np.array([pool[i].crowding for i in fr])
        order = np.argsort(-crowd, kind="stable")
        chosen.extend(fr[i] for i in order[: size - len(chosen)])
        break
    return [pool[i] for i in chosen]


def unique_front(pop: list[Individual]) -> list[Individual]:
    """Front 0 with duplicate phenotypes removed (first occurrence kept)."""
    fronts = nondominated_sort(pop)
    seen, out = set(), []
    for i in fronts[0]:
        key = pop[i].partition.key()
        if key not in seen:
            seen.add(key)
            out.append(pop[i])
    return out


# ---------------------------------------------------------------- operators


def uniform_crossover(a: Genotype, b: Genotype, rng) -> Genotype:
    if a.kind != b.kind or len(a) != len(b):
        raise ValueError("parents must share kind and length")
    take_a = rng.random(len(a)) < 0.5
    return a.with_genes(np.where(take_a, a.genes, b.genes))


def neighborhood_mutation(
    g: Genotype, nn: NeighborTable, L: int, rate: float, rng, delta_mode: str = "redirect"
) -> Genotype:
    """Re-link each gene with probability ``rate``.

    Locus genes move to one of the point's L nearest neighbors or to a
    self-link, uniformly. Delta-locus genes in ``redirect`` mode draw from
    {self-link, MST target, L nearest neighbors}; in ``binary`` mode they
    toggle between intact and removed.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must be in [0, 1]")
    if L > nn.L_max:
        raise ValueError(f"L={L} exceeds neighbor table depth {nn.L_max}")
    hit = np.flatnonzero(rng.random(len(g)) < rate)
    if hit.size == 0:
        return g
    genes = g.genes.copy()
    if g.kind == "locus":
        pick = rng.integers(0, L + 1, size=hit.size)
        genes[hit] = np.where(pick == 0, hit, nn.ranks[hit, np.maximum(pick - 1, 0)])
        return g.with_genes(genes)
    mst = g.context
    for e in hit:
        node = int(mst.gamma[e])
        target = int(mst.parent[node])
        if delta_mode == "binary":
            genes[e] = node if genes[e] == target else target
            continue
        domain = [node, target] + [int(x) for x in nn.ranks[node, :L] if x != target]
        genes[e] = domain[int(rng.integers(0, len(domain)))]
    return g.with_genes(genes)


def graph_variation(nn: NeighborTable, L: int = 10, rate: float | None = None,
                    crossover_prob: float = 0.7, delta_mode: str = "redirect") -> Variation:
    """Uniform crossover and neighborhood-biased mutation (rate 1/length by default)."""

    def cross(a: Individual, b: Individual, rng):
        return uniform_crossover(a.genotype, b.genotype, rng)

    def mutate(g: Genotype, rng):
        r = 1.0 / len(g) if rate is None else rate
        return neighborhood_mutation(g, nn, L, r, rng, delta_mode)

    return Variation(cross, mutate, crossover_prob)


# ---------------------------------------------------------------- NSGA-II


def _evaluate_all(genotypes, evaluate) -> list[Individual]:
    out = []
    for g in genotypes:
        obj, part = evaluate(g)
        out.append(Individual(g, obj, part))
    return out


def _trace_row(gen: int, pop: list[Individual]) -> dict:
    front = [pop[i] for i in nondominated_sort(pop)[0]]
    F = np.array([ind.f for ind in front])
    return {
        "generation": gen,
        "front0_size": len(front),
        "f1_min": float(F[:, 0].min()),
        "f1_max": float(F[:, 0].max()),
        "f2_min": float(F[:, 1].min()),
        "f2_max": float(F[:, 1].max()),
    }


def run_nsga2(
    init: Sequence[Genotype],
    evaluate: Callable,
    ops: Variation,
    generations: int = 100,
    pop_size: int | None = None,
    rng=None,
    on_generation: Callable | None = None,
    trace: list | None = None,
) -> ApproximationSet:
    """Generational NSGA-II; returns the final first front.

    ``on_generation(gen, population, offspring)`` is called after every
    environmental selection (offspring is empty for generation 0).
    """
    rng = np.random.default_rng(rng)
    init = list(getattr(init, "genotypes", init))
    if not init:
        raise ValueError("empty initial population")
    pop_size = len(init) if pop_size is None else pop_size
    genotypes = [init[i % len(init)] for i in range(pop_size)]
    pop = _evaluate_all(genotypes, evaluate)
    assign_rank_crowding(pop)
    if on_generation:
        on_generation(0, pop, [])
    if trace is not None:
        trace.append(_trace_row(0, pop))
    for gen in range(1, generations + 1):
        select = lambda: binary_tournament(pop, rng)  # noqa: E731
        children = [ops.offspring(select, rng) for _ in range(pop_size)]
        offspring = _evaluate_all(children, evaluate)
        pop = environmental_selection(pop + offspring, pop_size)
        if on_generation:
            on_generation(gen, pop, offspring)
        if trace is not None:
            trace.append(_trace_row(gen, pop))
    meta = {"engine": "nsga2", "generations": generations, "pop_size": pop_size,
            "crossover_prob": ops.crossover_prob, "operator_calls": dict(ops.calls)}
    return ApproximationSet(unique_front(pop), meta)


# ---------------------------------------------------------------- PESA-II


class HyperGrid:
    """Uniform grid over the archive's current objective ranges."""

    def __init__(self, members: Sequence[Individual], divisions: int = 10):
        if divisions < 1:
            raise ValueError("divisions must be >= 1")
        self.divisions = divisions
        F = _objective_matrix(list(members)).reshape(-1, 2)
        self.lo = F.min(axis=0) if len(F) else np.zeros(2)
        self.hi = F.max(axis=0) if len(F) else np.zeros(2)
        self.cells = self.cells_of(F)
        self.counts = np.bincount(self.cells, minlength=divisions * divisions)

    def cells_of(self, F) -> np.ndarray:
        F = np.asarray(F, dtype=np.float64).reshape(-1, 2)
        span = self.hi - self.lo
        safe = np.where(span > 0, span, 1.0)
        idx = np.floor((F - self.lo) / safe * self.divisions).astype(np.int64)
        idx = np.clip(idx, 0, self.divisions - 1)
        idx[:, span <= 0] = 0
        return idx[:, 0] * self.divisions + idx[:, 1]

    def cell_of(self, f) -> int:
        return int(self.cells_of(f)[0])

    def occupied(self) -> np.ndarray:
        return np.flatnonzero(self.counts)


def archive_insert(archive: list[Individual], cand: Individual, cap: int, divisions: int, rng) -> bool:
    """Add ``cand`` if no member dominates or duplicates it; evict when over ``cap``."""
    f = np.asarray(cand.f)
    if archive:
        F = _objective_matrix(archive)
        le = (F <= f).all(axis=1)
        if (le & ((F < f).any(axis=1) | (F == f).all(axis=1))).any():
            return False
        beaten = (f <= F).all(axis=1) & (f < F).any(axis=1)
        if beaten.any():
            archive[:] = [m for m, b in zip(archive, beaten) if not b]
    archive.append(cand)
    if len(archive) > cap:
        grid = HyperGrid(archive, divisions)
        worst = int(grid.counts.argmax())
        members = np.flatnonzero(grid.cells == worst)
        del archive[int(members[rng.integers(0, members.size)])]
    return True


def run_pesa2(
    init: Sequence[Genotype],
    evaluate: Callable,
    ops: Variation,
    generations: int = 500,
    internal_size: int = 10,
    archive_cap: int = 1000,
    grid_divisions: int = 10,
    rng=None,
    on_generation: Callable | None = None,
    trace: list | None = None,
) -> ApproximationSet:
    """Region-based PESA-II; returns the final archive.

    ``on_generation(gen, archive)`` is called after each archive update.
    """
    if archive_cap < 1:
        raise ValueError("archive_cap must be >= 1")
    rng = np.random.default_rng(rng)
    init = list(getattr(init, "genotypes", init))
    archive: list[Individual] = []
    for ind in _evaluate_all(init, evaluate):
        archive_insert(archive, ind, archive_cap, grid_divisions, rng)
    if on_generation:
        on_generation(0, archive)
    if trace is not None:
        trace.append(_trace_row(0, archive))
    for gen in range(1, generations + 1):
        grid = HyperGrid(archive, grid_divisions)
        occupied = grid.occupied()

        def select():
            c1, c2 = (int(occupied[i]) for i in rng.integers(0, occupied.size, size=2))
            cell = c2 if grid.counts[c2] < grid.counts[c1] else c1
            members = np.flatnonzero(grid.cells == cell)
            return archive[int(members[rng.integers(0, members.size)])]

        children = [ops.offspring(select, rng) for _ in range(internal_size)]
        for ind in _evaluate_all(children, evaluate):
            archive_insert(archive, ind, archive_cap, grid_divisions, rng)
        if on_generation:
            on_generation(gen, archive)
        if trace is not None:
            trace.append(_trace_row(gen, archive))
    meta = {"engine": "pesa2", "generations": generations, "internal_size": internal_size,
            "archive_cap": archive_cap, "grid_divisions": grid_divisions,
            "crossover_prob": ops.crossover_prob, "operator_calls": dict(ops.calls)}
    return ApproximationSet(unique_front(archive), meta)


def write_trace(trace: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        if not trace:
            return
        w = csv.DictWriter(fh, fieldnames=list(trace[0]), lineterminator="\n")
        w.writeheader()
        for row in trace:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
