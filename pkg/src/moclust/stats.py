"""Adjusted Rand index and the Kruskal-Wallis / Nemenyi comparison."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import chi2, rankdata, studentized_range

from .dataset import Partition

ALPHA = 0.05
NEMENYI_METHOD = (
    "Tukey-Kramer-Nemenyi all-pairs test: q = |mean rank i - mean rank j| / "
    "sqrt(N(N+1)/12 (1/n_i + 1/n_j)); p = P(studentized range(k groups, df=inf) >= q*sqrt(2)); "
    "two-sided, no tie correction, alpha=0.05"
)


# ---------------------------------------------------------------- ARI


@dataclass
class ContingencyTable:
    counts: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    n: int


def contingency(p1: Partition, p2: Partition) -> ContingencyTable:
    if p1.n != p2.n:
        raise ValueError(f"partitions differ in length: {p1.n} vs {p2.n}")
    table = np.zeros((p1.k, p2.k), dtype=np.int64)
    np.add.at(table, (p1.assign, p2.assign), 1)
    return ContingencyTable(table, table.sum(axis=1), table.sum(axis=0), p1.n)


def _comb2(x) -> int:
    return sum(int(v) * (int(v) - 1) // 2 for v in np.ravel(x))


def ari(p1: Partition, p2: Partition) -> float:
    t = contingency(p1, p2)
    index = _comb2(t.counts)
    sum_a, sum_b = _comb2(t.rows), _comb2(t.cols)
    total = t.n * (t.n - 1) // 2
    expected = sum_a * sum_b / total if total else 0.0
    max_index = (sum_a + sum_b) / 2
    denom = max_index - expected
    if denom == 0:
        return 1.0 if p1 == p2 else 0.0
    return (index - expected) / denom


def best_of_set(members, truth: Partition):
    """(ARI, k, Partition) of the member closest to ``truth``.

    Ties go to the smaller |k - k*|, then the smaller k.
    """
    parts = [m.partition if hasattr(m, "partition") else m for m in members]
    if not parts:
        raise ValueError("empty approximation set")
    scored = [(ari(p, truth), p) for p in parts]
    best = min(scored, key=lambda s: (-s[0], abs(s[1].k - truth.k), s[1].k))
    return best[0], best[1].k, best[1]


# ---------------------------------------------------------------- tests


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> tuple[float, float]:
    """Tie-corrected Kruskal-Wallis H and its chi-square p-value."""
    groups = [np.asarray(g, dtype=np.float64) for g in groups]
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    if any(g.size == 0 for g in groups):
        raise ValueError("every group needs at least one value")
    pooled = np.concatenate(groups)
    N = pooled.size
    if N < 3:
        raise ValueError("need at least 3 observations in total")
    ranks = rankdata(pooled)
    _, ties = np.unique(pooled, return_counts=True)
    correction = 1.0 - float((ties**3 - ties).sum()) / (N**3 - N)
    if correction == 0:
        return 0.0, 1.0
    h = 0.0
    start = 0
    for g in groups:
        r = ranks[start : start + g.size]
        h += r.sum() ** 2 / g.size
        start += g.size
    H = (12.0 / (N * (N + 1)) * h - 3.0 * (N + 1)) / correction
    H = max(H, 0.0)
    return float(H), float(chi2.sf(H, len(groups) - 1))


@dataclass
class NemenyiResult:
    pvalues: np.ndarray
    mean_ranks: np.ndarray

    def significant(self, alpha: float = ALPHA) -> np.ndarray:
        return self.pvalues < alpha


def nemenyi_posthoc(groups: Sequence[Sequence[float]]) -> NemenyiResult:
    groups = [np.asarray(g, dtype=np.float64) for g in groups]
    k = len(groups)
    if k < 2:
        raise ValueError("need at least two groups")
    sizes = np.array([g.size for g in groups])
    ranks = rankdata(np.concatenate(groups))
    bounds = np.r_[0, np.cumsum(sizes)]
    mean_ranks = np.array([ranks[bounds[i] : bounds[i + 1]].mean() for i in range(k)])
    N = int(sizes.sum())
    p = np.ones((k, k))
    for i, j in combinations(range(k), 2):
        se = math.sqrt(N * (N + 1) / 12.0 * (1.0 / sizes[i] + 1.0 / sizes[j]))
        q = abs(mean_ranks[i] - mean_ranks[j]) / se
        p[i, j] = p[j, i] = min(1.0, float(studentized_range.sf(q * math.sqrt(2.0), k, np.inf))) if q > 0 else 1.0
    return NemenyiResult(p, mean_ranks)


# ---------------------------------------------------------------- records and reports


@dataclass
class RunRecord:
    dataset: str
    algorithm: str
    run: int
    seed: int
    best_ari: float
    k: int
    wall_time: float = 0.0


@dataclass
class DatasetComparison:
    dataset: str
    algorithms: list[str]
    H: float
    p: float
    pairwise: np.ndarray
    winners: list[str] = field(default_factory=list)


def aggregate_runs(records: Iterable[RunRecord], algo_order: Sequence[str] | None = None) -> list[dict]:
    """Mean and sample std of best ARI plus mean k per (dataset, algorithm)."""
    groups: dict[tuple[str, str], list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.dataset, r.algorithm), []).append(r)
    order = {a: i for i, a in enumerate(algo_order or [])}
    keys = sorted(groups, key=lambda key: (key[0], order.get(key[1], len(order)), key[1]))
    rows = []
    for ds, algo in keys:
        recs = groups[(ds, algo)]
        v = np.array([r.best_ari for r in recs])
        rows.append({
            "dataset": ds,
            "algorithm": algo,
            "runs": len(recs),
            "mean_ari": float(v.mean()),
            "std_ari": float(v.std(ddof=1)) if v.size > 1 else 0.0,
            "mean_k": float(np.mean([r.k for r in recs])),
        })
    return rows


def compare(records: Iterable[RunRecord], algo_order: Sequence[str] | None = None) -> list[DatasetComparison]:
    by_ds: dict[str, dict[str, list[float]]] = {}
    for r in records:
        by_ds.setdefault(r.dataset, {}).setdefault(r.algorithm, []).append(r.best_ari)
    order = {a: i for i, a in enumerate(algo_order or [])}
    out = []
    for ds in sorted(by_ds):
        algos = sorted(by_ds[ds], key=lambda a: (order.get(a, len(order)), a))
        groups = [by_ds[ds][a] for a in algos]
        if len(algos) < 2 or sum(len(g) for g in groups) < 3:
            out.append(DatasetComparison(ds, algos, 0.0, 1.0, np.ones((len(algos), len(algos))), algos))
            continue
        H, p = kruskal_wallis(groups)
        nem = nemenyi_posthoc(groups)
        means = [float(np.mean(g)) for g in groups]
        top = int(np.argmax(means))
        winners = [a for i, a in enumerate(algos) if i == top or not nem.significant()[top, i]]
        out.append(DatasetComparison(ds, algos, H, p, nem.pvalues, winners))
    return out


def median_best_index(values: Sequence[float]) -> int:
    """Index of the lower-median value (stable on ties)."""
    if not len(values):
        raise ValueError("no values")
    order = np.argsort(np.asarray(values, dtype=np.float64), kind="stable")
    return int(order[(len(values) - 1) // 2])


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def write_records(records: Sequence[RunRecord], path, with_time: bool = False) -> None:
    fields = ["dataset", "algorithm", "run", "seed", "best_ari", "k"] + (["wall_time"] if with_time else [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in records:
            row = asdict(r)
            row["best_ari"] = repr(float(r.best_ari))
            row["wall_time"] = f"{r.wall_time:.3f}"
            w.writerow([row[f] for f in fields])


def read_records(path) -> list[RunRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(RunRecord(row["dataset"], row["algorithm"], int(row["run"]), int(row["seed"]),
                                 float(row["best_ari"]), int(row["k"]), float(row.get("wall_time") or 0.0)))
    return out


def write_summary(rows: Sequence[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "algorithm", "runs", "mean_ari", "std_ari", "mean_k"])
        for r in rows:
            w.writerow([r["dataset"], r["algorithm"], r["runs"], _fmt(r["mean_ari"]), _fmt(r["std_ari"]),
                        f"{r['mean_k']:.2f}"])


def write_significance(comparisons: Sequence[DatasetComparison], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {NEMENYI_METHOD}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "kruskal_H", "kruskal_p", "algo_a", "algo_b", "nemenyi_p", "significant", "winners"])
        for c in comparisons:
            winners = "|".join(c.winners)
            pairs = list(combinations(range(len(c.algorithms)), 2)) or [(0, 0)]
            for i, j in pairs:
                pv = float(c.pairwise[i, j])
                w.writerow([c.dataset, _fmt(c.H), _fmt(c.p), c.algorithms[i], c.algorithms[j], _fmt(pv),
                            int(pv < ALPHA), winners])
