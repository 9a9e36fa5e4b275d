import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moclust.dataset import Dataset, Partition, build_neighbor_table
from moclust.encoding import (
    Genotype,
    decode,
    encode_mst_full,
    encode_partition,
    genotype_length,
    loads_genotype,
    remove_links,
)
from moclust.graph import build_mst, compute_di, split_links
from oracles import bfs_components


def _mst(rng, n=30, gamma=None):
    ds = Dataset(rng.normal(size=(n, 2)))
    mst = compute_di(build_mst(ds), build_neighbor_table(ds, min(10, n - 1)))
    return split_links(mst, n - 1 if gamma is None else gamma)


def test_decode_small_cases():
    assert decode(Genotype("locus", [1, 0])).k == 1
    assert decode(Genotype("locus", np.arange(6))).k == 6


def test_decode_matches_bfs(rng):
    for _ in range(300):
        n = int(rng.integers(1, 101))
        genes = rng.integers(0, n, size=n)
        assert decode(Genotype("locus", genes)).assign.tolist() == bfs_components(genes)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 60).flatmap(lambda n: st.lists(st.integers(0, n - 1), min_size=n, max_size=n)))
def test_decode_property(genes):
    p = decode(Genotype("locus", genes))
    assert p.assign.tolist() == bfs_components(genes)
    # every link joins two points of the same cluster
    assert all(p.assign[i] == p.assign[j] for i, j in enumerate(genes))


def test_genotype_validation(rng):
    with pytest.raises(ValueError):
        Genotype("binary", [0])
    with pytest.raises(ValueError):
        Genotype("delta-locus", [0, 1])
    mst = _mst(rng, 10, 4)
    with pytest.raises(ValueError):
        Genotype("delta-locus", [0, 1], mst)
    with pytest.raises(ValueError):
        decode(Genotype("locus", [0, 9]))


def test_full_mst_one_cluster(rng):
    mst = _mst(rng, 40, 12)
    assert decode(encode_mst_full(mst, "locus")).k == 1
    g = encode_mst_full(mst, "delta-locus")
    assert decode(g).k == 1
    assert np.array_equal(g.genes, mst.parent[mst.gamma])


def test_remove_links_matches_bfs(rng):
    mst = _mst(rng, 40)
    for _ in range(100):
        cut = rng.choice(mst.edges, size=int(rng.integers(0, 39)), replace=False)
        g = remove_links(mst, "locus", cut)
        locus = mst.parent.copy()
        locus[cut] = cut
        p = decode(g)
        assert p.assign.tolist() == bfs_components(locus.tolist())
        assert p.k == 1 + cut.size


def test_delta_locus_remove_and_expand(rng):
    mst = _mst(rng, 40, 15)
    cut = mst.gamma[[0, 3, 7]]
    g = remove_links(mst, "delta-locus", cut)
    assert decode(g).k == 4
    assert np.array_equal(decode(g).assign, decode(remove_links(mst, "locus", cut)).assign)
    with pytest.raises(ValueError):
        remove_links(mst, "delta-locus", mst.delta_fixed[:1])


def test_encode_partition_roundtrip(rng):
    for _ in range(100):
        labels = rng.integers(0, 5, size=int(rng.integers(1, 50)))
        p = Partition(np.unique(labels, return_inverse=True)[1])
        assert decode(encode_partition(p)) == p


def test_dumps_loads(rng):
    mst = _mst(rng, 20, 6)
    g = remove_links(mst, "delta-locus", mst.gamma[:2])
    back = loads_genotype(g.dumps(), mst)
    assert back.same_genes(g)
    loc = Genotype("locus", [2, 0, 1])
    assert loads_genotype(loc.dumps()).same_genes(loc)


def test_genotype_length():
    assert genotype_length("locus", 588) == 588
    assert genotype_length("delta-locus", 588, 121) == 121
    assert genotype_length("delta-locus", 50, 49) == 49
    with pytest.raises(ValueError):
        genotype_length("delta-locus", 50)
