import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moclust.dataset import Dataset, build_neighbor_table
from moclust.encoding import Genotype, decode
from moclust.graph import build_mst, compute_di, init_mock, split_links
from moclust.moea import (
    HyperGrid,
    Individual,
    Variation,
    archive_insert,
    binary_tournament,
    crowding_distance,
    dominates,
    environmental_selection,
    graph_variation,
    neighborhood_mutation,
    nondominated_sort,
    run_nsga2,
    run_pesa2,
    uniform_crossover,
    write_trace,
)
from moclust.objectives import Evaluator, ObjectivePair
from moclust.stats import ari
from moclust.synthetic import two_blobs
from oracles import crowding_oracle, dominates as dom_oracle, peel_fronts


def _ind(f, n=3):
    from moclust.dataset import Partition
    return Individual(Genotype("locus", np.arange(n)), ObjectivePair(*f), Partition(np.arange(n)))


class _Heads:
    """Stub generator whose uniform draws are always 0 (all heads)."""

    def random(self, size=None):
        return np.zeros(size) if size is not None else 0.0


def test_dominates():
    assert dominates((1, 2), (2, 2))
    assert not dominates((1, 2), (1, 2))
    assert not dominates((1, 3), (2, 2))


def test_sort_hand():
    fronts = nondominated_sort([(1, 2), (2, 1), (2, 2)])
    assert [sorted(f) for f in fronts] == [[0, 1], [2]]
    assert nondominated_sort([(3, 3)] * 5) == [[0, 1, 2, 3, 4]]


def test_sort_matches_peeling(rng):
    for _ in range(20):
        P = rng.integers(0, 15, size=(200, 2)).astype(float)
        assert [sorted(f) for f in nondominated_sort(P)] == peel_fronts(P.tolist())


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=40))
def test_sort_properties(points):
    fronts = nondominated_sort(points)
    assert sorted(i for f in fronts for i in f) == list(range(len(points)))
    for f in fronts:
        for i in f:
            assert not any(dom_oracle(points[j], points[i]) for j in f)


def test_crowding_cases():
    pop = [(0.0, 2.0), (1.0, 1.0), (2.0, 0.0)]
    d = crowding_distance([0, 1, 2], pop)
    assert math.isinf(d[0]) and math.isinf(d[2]) and d[1] == 2.0
    assert all(math.isinf(x) for x in crowding_distance([0, 1], pop))


def test_crowding_matches_oracle(rng):
    for _ in range(100):
        m = int(rng.integers(1, 25))
        F = rng.integers(0, 8, size=(m, 2)).astype(float)
        got = crowding_distance(list(range(m)), F)
        # both sides break equal values by index
        assert np.allclose(got, crowding_oracle(F.tolist()), rtol=0, atol=1e-12)


def test_crowding_matches_oracle_distinct(rng):
    for _ in range(100):
        m = int(rng.integers(1, 25))
        F = rng.permutation(100)[: 2 * m].reshape(m, 2).astype(float)
        got = crowding_distance(list(range(m)), F)
        want = crowding_oracle(F.tolist())
        assert np.allclose(got, want, rtol=0, atol=1e-12)


def test_tournament_prefers_rank_then_crowding():
    a, b = _ind((0, 1)), _ind((1, 2))
    a.rank, b.rank = 0, 1
    c, e = _ind((0, 1)), _ind((0, 1))
    c.crowding, e.crowding = 1.0, 0.5

    class Pick:
        def integers(self, lo, hi, size):
            return np.array([1, 0])

    assert binary_tournament([c, e], Pick()) is c
    assert binary_tournament([a, b], Pick()) is a


def test_environmental_selection_keeps_best_fronts():
    pool = [_ind(f) for f in [(0, 4), (4, 0), (2, 2), (3, 3), (5, 5), (1, 3)]]
    kept = environmental_selection(pool, 4)
    fs = {ind.f for ind in kept}
    assert {(0, 4), (4, 0), (2, 2), (1, 3)} == fs


def test_uniform_crossover():
    rng = np.random.default_rng(1)
    a = Genotype("locus", [1, 2, 0, 3])
    b = Genotype("locus", [3, 3, 3, 0])
    assert uniform_crossover(a, a, rng).same_genes(a)
    assert uniform_crossover(a, b, _Heads()).same_genes(a)
    for _ in range(50):
        c = uniform_crossover(a, b, rng)
        assert all(g in (x, y) for g, x, y in zip(c.genes, a.genes, b.genes))
    with pytest.raises(ValueError):
        uniform_crossover(a, Genotype("locus", [0, 1]), rng)


def test_mutation_domains(rng):
    ds = Dataset(rng.normal(size=(40, 2)))
    nn = build_neighbor_table(ds, 10)
    g = Genotype("locus", rng.integers(0, 40, size=40))
    assert neighborhood_mutation(g, nn, 10, 0.0, rng).same_genes(g)
    m = neighborhood_mutation(g, nn, 1, 1.0, rng)
    assert all(x in (i, nn.ranks[i, 0]) for i, x in enumerate(m.genes))
    for _ in range(50):
        m = neighborhood_mutation(g, nn, 5, 0.3, rng)
        for i, (old, new) in enumerate(zip(g.genes, m.genes)):
            assert new == old or new == i or new in nn.ranks[i, :5]


def test_delta_mutation_domains(rng):
    ds = Dataset(rng.normal(size=(50, 2)))
    nn = build_neighbor_table(ds, 10)
    mst = split_links(compute_di(build_mst(ds), nn), 12)
    from moclust.encoding import encode_mst_full
    g = encode_mst_full(mst, "delta-locus")
    for _ in range(30):
        m = neighborhood_mutation(g, nn, 10, 1.0, rng)
        for e, new in enumerate(m.genes):
            node = mst.gamma[e]
            assert new in (node, mst.parent[node]) or new in nn.ranks[node]
        b = neighborhood_mutation(g, nn, 10, 1.0, rng, delta_mode="binary")
        assert np.array_equal(b.genes, mst.gamma)


def _blob_setup(rng, n=60):
    ds = two_blobs(n, rng=rng)
    nn = build_neighbor_table(ds, 10)
    mst = compute_di(build_mst(ds), nn)
    return ds, nn, mst


def test_nsga2_zero_generations(rng):
    ds, nn, mst = _blob_setup(rng)
    init = init_mock(ds, mst, nn, 20, 4, rng)
    ev = Evaluator("mock", ds, nn)
    out = run_nsga2(init, ev, graph_variation(nn), generations=0, rng=1)
    objs = [ev(g)[0].as_tuple() for g in init.genotypes]
    nd = {objs[i] for i in range(len(objs)) if not any(dom_oracle(objs[j], objs[i]) for j in range(len(objs)))}
    assert {m.f for m in out} == nd


def test_nsga2_fixed_point(rng):
    ds, nn, mst = _blob_setup(rng)
    g = init_mock(ds, mst, nn, 2, 2, rng).genotypes[0]
    ops = graph_variation(nn, rate=0.0, crossover_prob=1.0)
    out = run_nsga2([g] * 10, Evaluator("mock", ds, nn), ops, generations=5, rng=2)
    assert len(out) == 1 and out.members[0].genotype.same_genes(g)


def test_nsga2_finds_blobs_and_is_deterministic(rng):
    ds, nn, mst = _blob_setup(rng)
    init = init_mock(ds, mst, nn, 20, 4, np.random.default_rng(5))
    runs = []
    for _ in range(2):
        out = run_nsga2(init, Evaluator("mock", ds, nn), graph_variation(nn), generations=15, rng=9)
        runs.append(out.objective_matrix())
        assert max(ari(p, ds.truth()) for p in out.partitions) == 1.0
    assert np.array_equal(runs[0], runs[1])


def test_pesa2_archive_behaviour(rng):
    ds, nn, mst = _blob_setup(rng)
    init = init_mock(ds, mst, nn, 20, 4, rng)
    ev = Evaluator("mock", ds, nn)

    def check(gen, archive):
        F = [m.f for m in archive]
        assert not any(dom_oracle(a, b) for a in F for b in F)

    out = run_pesa2(init, ev, graph_variation(nn), generations=30, rng=3, on_generation=check)
    assert max(ari(p, ds.truth()) for p in out.partitions) == 1.0
    sizes = []
    run_pesa2(init, ev, graph_variation(nn), generations=10, archive_cap=1, rng=3,
              on_generation=lambda g, a: sizes.append(len(a)))
    assert set(sizes) == {1}


def test_pesa2_zero_generations(rng):
    ds, nn, mst = _blob_setup(rng)
    init = init_mock(ds, mst, nn, 20, 4, rng)
    ev = Evaluator("mock", ds, nn)
    out = run_pesa2(init, ev, graph_variation(nn), generations=0, rng=1)
    objs = [ev(g)[0].as_tuple() for g in init.genotypes]
    nd = {objs[i] for i in range(len(objs)) if not any(dom_oracle(objs[j], objs[i]) for j in range(len(objs)))}
    assert {m.f for m in out} == nd


def test_hypergrid_and_archive_insert():
    members = [_ind(f) for f in [(0, 10), (10, 0), (5, 5)]]
    grid = HyperGrid(members, 10)
    assert grid.cell_of((0, 10)) == 9 and grid.cell_of((10, 0)) == 90
    assert grid.occupied().size == 3
    flat = HyperGrid([_ind((1, 1)), _ind((1, 1))], 4)
    assert flat.cell_of((1, 1)) == 0
    arch = []
    rng = np.random.default_rng(0)
    assert archive_insert(arch, _ind((2, 2)), 5, 4, rng)
    assert not archive_insert(arch, _ind((2, 2)), 5, 4, rng)
    assert not archive_insert(arch, _ind((3, 2)), 5, 4, rng)
    assert archive_insert(arch, _ind((1, 1)), 5, 4, rng) and len(arch) == 1
    for i in range(10):
        archive_insert(arch, _ind((float(i) / 10, 1 - float(i) / 10 + 0.05)), 3, 4, rng)
    assert len(arch) <= 3


def test_variation_counts():
    calls = []
    ops = Variation(lambda a, b, r: calls.append("x") or a.genotype, None, 1.0)
    a = _ind((0, 0))
    ops.offspring(lambda: a, np.random.default_rng(0))
    assert ops.calls == {"crossover": 1, "mutate": 0}


def test_write_trace(tmp_path, rng):
    ds, nn, mst = _blob_setup(rng)
    trace = []
    run_nsga2(init_mock(ds, mst, nn, 10, 4, rng), Evaluator("mock", ds, nn), graph_variation(nn),
              generations=3, rng=1, trace=trace)
    write_trace(trace, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0].startswith("generation,front0_size") and len(lines) == 5
