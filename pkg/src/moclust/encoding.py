"""Locus-based adjacency and delta-locus genotypes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .dataset import Partition
from .kernels import decode_locus

if TYPE_CHECKING:
    from .graph import MstModel

KINDS = ("locus", "delta-locus")


@dataclass(frozen=True, eq=False)
class Genotype:
    """Gene vector plus, for delta-locus, the MST it is expressed against.

    Locus genes have length n; gene i names the point linked to i.
    Delta-locus genes have length |gamma|; gene e is the target of the
    relevant MST edge leaving node ``context.gamma[e]``. The intact target is
    ``parent[node]``, a self-link removes the edge, any other value redirects
    the link.
    """

    kind: str
    genes: np.ndarray
    context: MstModel | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown genotype kind {self.kind!r}")
        g = np.array(self.genes, dtype=np.int64)
        g.setflags(write=False)
        object.__setattr__(self, "genes", g)
        if self.kind == "delta-locus":
            if self.context is None or self.context.gamma is None:
                raise ValueError("delta-locus genotypes need an MstModel with gamma filled")
            if g.size != self.context.gamma.size:
                raise ValueError("delta-locus length must equal |gamma|")

    def __len__(self):
        return self.genes.size

    def with_genes(self, genes) -> Genotype:
        return Genotype(self.kind, genes, self.context)

    def as_locus(self) -> np.ndarray:
        """Full length-n link vector equivalent to this genotype."""
        if self.kind == "locus":
            return self.genes
        full = self.context.parent.copy()
        full[self.context.gamma] = self.genes
        return full

    def same_genes(self, other: Genotype) -> bool:
        return self.kind == other.kind and np.array_equal(self.genes, other.genes)

    def dumps(self) -> str:
        return " ".join([self.kind, *map(str, self.genes.tolist())])


def loads_genotype(line: str, context: MstModel | None = None) -> Genotype:
    kind, *genes = line.split()
    return Genotype(kind, [int(x) for x in genes], context)


def decode(g: Genotype) -> Partition:
    """Connected components of the encoded link graph."""
    labels, _ = decode_locus(g.as_locus())
    return Partition(labels)


def encode_mst_full(mst: MstModel, kind: str = "locus") -> Genotype:
    """The individual with every MST link intact (one cluster)."""
    if kind == "locus":
        return Genotype("locus", mst.parent)
    if mst.gamma is None:
        raise ValueError("split_links must run before delta-locus encoding")
    return Genotype("delta-locus", mst.parent[mst.gamma], mst)


def remove_links(mst: MstModel, kind: str, nodes) -> Genotype:
    """Full-MST genotype with the edges leaving ``nodes`` cut."""
    g = encode_mst_full(mst, kind)
    genes = g.genes.copy()
    nodes = np.asarray(nodes, dtype=np.int64)
    if kind == "locus":
        genes[nodes] = nodes
    else:
        pos = np.searchsorted(mst.gamma, nodes)
        if np.any(pos >= mst.gamma.size) or np.any(mst.gamma[np.minimum(pos, mst.gamma.size - 1)] != nodes):
            raise ValueError("delta-locus can only cut gamma edges")
        genes[pos] = nodes
    return g.with_genes(genes)


def encode_partition(p: Partition) -> Genotype:
    """Locus genotype whose decoding is exactly ``p``.

    Members of each cluster are chained in index order and the last links
    back to the first.
    """
    a = p.assign
    order = np.argsort(a, kind="stable")
    genes = np.empty(a.size, dtype=np.int64)
    bounds = np.flatnonzero(np.diff(a[order])) + 1
    for members in np.split(order, bounds):
        genes[members] = np.roll(members, -1)
    return Genotype("locus", genes)


def genotype_length(kind: str, n: int, gamma_size: int | None = None) -> int:
    if kind == "locus":
        return n
    if kind == "delta-locus":
        if gamma_size is None:
            raise ValueError("delta-locus length needs gamma_size")
        return gamma_size
    raise ValueError(f"unknown genotype kind {kind!r}")
