"""Datasets, exact nearest-neighbor tables and the Partition type."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .kernels import sq_dists_to

LABEL_MODES = ("embedded", "separate", "none")


class DatasetFormatError(ValueError):
    """Raised for malformed dataset or label files."""


@dataclass(frozen=True, eq=False)
class Dataset:
    points: np.ndarray
    labels: np.ndarray | None = None
    name: str = "dataset"

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise ValueError("points must be an (n, d) array with d >= 1")
        if pts.shape[0] < 2:
            raise ValueError("a dataset needs at least 2 points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.asarray(self.labels)
            if lab.shape != (pts.shape[0],):
                raise DatasetFormatError(
                    f"label count {lab.size} does not match point count {pts.shape[0]}"
                )
            dense = partition_from_labels(lab).assign
            object.__setattr__(self, "labels", dense)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def k_star(self) -> int | None:
        if self.labels is None:
            return None
        return int(self.labels.max()) + 1

    def truth(self) -> Partition | None:
        return None if self.labels is None else Partition(self.labels)

    def minmax_normalized(self) -> Dataset:
        lo = self.points.min(axis=0)
        span = self.points.max(axis=0) - lo
        span[span == 0] = 1.0
        return Dataset((self.points - lo) / span, self.labels, self.name)


@dataclass(frozen=True, eq=False)
class NeighborTable:
    """``ranks[i, j]`` is the (j+1)-th nearest neighbor of point i."""

    ranks: np.ndarray

    @property
    def L_max(self) -> int:
        return self.ranks.shape[1]

    def rank_of(self, i: int, j: int) -> int:
        """1-based rank of j in i's list, or ``L_max + 1`` if absent."""
        hit = np.flatnonzero(self.ranks[i] == j)
        return int(hit[0]) + 1 if hit.size else self.L_max + 1


@dataclass(frozen=True, eq=False)
class Partition:
    """Dense cluster assignment; labels 0..k-1 with no empty cluster."""

    assign: np.ndarray
    k: int = field(init=False)

    def __post_init__(self):
        a = np.asarray(self.assign, dtype=np.int64)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("assignment must be a non-empty 1-D sequence")
        k = int(a.max()) + 1
        if a.min() < 0 or np.bincount(a, minlength=k).min() == 0:
            raise ValueError("labels must be dense in 0..k-1")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "assign", a)
        object.__setattr__(self, "k", k)

    @property
    def n(self) -> int:
        return self.assign.size

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assign, minlength=self.k)

    def canonical(self) -> Partition:
        return partition_from_labels(self.assign)

    def key(self) -> bytes:
        """Hashable identity of the co-membership structure."""
        return partition_from_labels(self.assign).assign.tobytes()

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.n == other.n and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Partition(n={self.n}, k={self.k})"


def partition_from_labels(raw) -> Partition:
    """Densify arbitrary labels, numbering clusters by first occurrence."""
    raw = np.asarray(raw)
    if raw.size == 0:
        raise ValueError("empty label sequence")
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    order = np.empty(first.size, dtype=np.int64)
    order[np.argsort(first, kind="stable")] = np.arange(first.size)
    return Partition(order[inverse.ravel()])


def euclidean(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return math.sqrt(float(sq_dists_to(a.reshape(1, -1), b)[0]))


def build_neighbor_table(ds: Dataset, L_max: int = 10, block_elems: int = 4_000_000) -> NeighborTable:
    """Exact L_max nearest neighbors of every point, ties to the lower index.

    Distances are computed in row blocks so memory stays O(block * n).
    """
    n = ds.n
    if not 1 <= L_max <= n - 1:
        raise ValueError(f"L_max must be in 1..{n - 1}, got {L_max}")
    X = ds.points
    ranks = np.empty((n, L_max), dtype=np.int64)
    block = max(1, block_elems // max(n, 1))
    for start in range(0, n, block):
        stop = min(n, start + block)
        D = np.zeros((stop - start, n))
        for j in range(ds.d):
            t = X[start:stop, j, None] - X[None, :, j]
            D += t * t
        rows = np.arange(stop - start)
        D[rows, rows + start] = np.inf
        kth = np.partition(D, L_max - 1, axis=1)[:, L_max - 1]
        for r in rows:
            cand = np.flatnonzero(D[r] <= kth[r])
            # cand is index-ordered and the sort is stable: equal distances keep the lower index first
            cand = cand[np.argsort(D[r, cand], kind="stable")]
            ranks[start + r] = cand[:L_max]
    ranks.setflags(write=False)
    return NeighborTable(ranks)


def load_dataset(
    path,
    label_mode: str = "embedded",
    labels_path=None,
    header: bool = False,
    name: str | None = None,
) -> Dataset:
    """Read a comma-separated feature file.

    ``label_mode`` is ``embedded`` (last column holds the label), ``separate``
    (one integer per line in ``labels_path``) or ``none``.
    """
    if label_mode not in LABEL_MODES:
        raise ValueError(f"label_mode must be one of {LABEL_MODES}")
    path = Path(path)
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        if header:
            next(reader, None)
        for lineno, row in enumerate(reader, start=1 + int(header)):
            if not row or all(not c.strip() for c in row):
                continue
            rows.append((lineno, [c.strip() for c in row]))
    if not rows:
        raise DatasetFormatError(f"{path}: no data rows")
    width = len(rows[0][1])
    for lineno, row in rows:
        if len(row) != width:
            raise DatasetFormatError(f"{path}:{lineno}: expected {width} columns, got {len(row)}")

    raw_labels = None
    if label_mode == "embedded":
        if width < 2:
            raise DatasetFormatError(f"{path}: embedded labels need at least 2 columns")
        raw_labels = [_parse_int(row[-1], path, lineno) for lineno, row in rows]
        rows = [(lineno, row[:-1]) for lineno, row in rows]
    elif label_mode == "separate":
        if labels_path is None:
            raise ValueError("label_mode='separate' requires labels_path")
        raw_labels = read_label_file(labels_path)
        if len(raw_labels) != len(rows):
            raise DatasetFormatError(
                f"{labels_path}: {len(raw_labels)} labels for {len(rows)} points"
            )

    pts = np.empty((len(rows), len(rows[0][1])))
    for r, (lineno, row) in enumerate(rows):
        for c, cell in enumerate(row):
            try:
                pts[r, c] = float(cell)
            except ValueError:
                raise DatasetFormatError(f"{path}:{lineno}: non-numeric feature {cell!r}") from None
    labels = None if raw_labels is None else np.asarray(raw_labels)
    return Dataset(pts, labels, name or path.stem)


def read_label_file(path) -> list[int]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if line:
                out.append(_parse_int(line, path, lineno))
    return out


def _parse_int(text, path, lineno) -> int:
    try:
        return int(text)
    except ValueError:
        try:
            value = float(text)
        except ValueError:
            raise DatasetFormatError(f"{path}:{lineno}: label {text!r} is not an integer") from None
        if not value.is_integer():
            raise DatasetFormatError(f"{path}:{lineno}: label {text!r} is not an integer")
        return int(value)


def save_dataset(ds: Dataset, path, embed_labels: bool = True) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for i in range(ds.n):
            row = [repr(float(v)) for v in ds.points[i]]
            if embed_labels and ds.labels is not None:
                row.append(str(int(ds.labels[i])))
            w.writerow(row)
