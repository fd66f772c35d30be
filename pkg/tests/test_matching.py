import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from fixdeg.corpus import connected_corpus
from fixdeg.graph import Graph, cut_stats
from fixdeg.matching import (
    KMatching,
    MatchingStats,
    alternating_reach,
    certificate_partition,
    deficiency_sets,
    lambda_k,
    max_k_matching,
    posa_set_S,
    target_set_k,
    total_deficiency,
)
from fixdeg.oracles import deficiency_sets_by_enumeration, lambda_k_exhaustive
from fixdeg.walks import UP, is_alternating_walk, reach_by_states, symmetric_difference

# K_{2,4}: u1=0, u2=1, w1..w4 = 2..5
K24 = Graph(6, [(u, w) for u in (0, 1) for w in range(2, 6)])
STAR = Graph(4, [(0, 1), (0, 2), (0, 3)])  # centre z = 0
C6 = Graph(6, [(i, (i + 1) % 6) for i in range(6)])
K4 = Graph(4, itertools.combinations(range(4), 2))


@st.composite
def small_graphs(draw, lo=2, hi=9):
    n = draw(st.integers(lo, hi))
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, [e for e, k in zip(pairs, keep) if k])


def test_max_k_matching_examples():
    f = max_k_matching(C6, 2)
    assert f.edges == frozenset(C6.edges()) and f.deficiency == 0
    s = max_k_matching(STAR, 2)
    assert s.size == 2 and s.deficiency == 2
    assert max_k_matching(K24, 1).size == 2 and lambda_k(K24, 1) == 1


def test_lambda_examples():
    for n in range(3, 9):
        assert lambda_k(Graph(n, [(i, (i + 1) % n) for i in range(n)]), 2) == 0
    assert lambda_k(STAR, 2) == 2
    assert lambda_k(K4, 3) == 0
    assert total_deficiency(Graph(3, [(0, 1), (1, 2)]), 1) == 1


def test_reach_examples():
    p3 = Graph(3, [(0, 1), (1, 2)])  # a-b-c
    f = KMatching(1, 3, frozenset({(0, 1)}))
    assert alternating_reach(p3, f, 2, "ud") == {2, 0}
    fk = KMatching(1, 6, frozenset({(0, 4), (1, 5)}))
    assert {3, 4, 5} <= alternating_reach(K24, fk, 3, "ud")
    assert {0, 1} <= alternating_reach(K24, fk, 3, "uu")


@settings(max_examples=80, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(small_graphs(hi=7), st.integers(1, 3), st.data())
def test_reach_dual_route(g, k, data):
    f = max_k_matching(g, k)
    u = data.draw(st.integers(0, g.n - 1))
    assert u in alternating_reach(g, f, u, "ud")
    for t in ("uu", "ud", "du", "dd"):
        assert alternating_reach(g, f, u, t) == reach_by_states(g, f.edges, u, t), t


def test_deficiency_sets_examples():
    ds = deficiency_sets(STAR, 2)
    assert ds.exact and ds.X == {1, 2, 3}
    dk = deficiency_sets(K24, 1)
    assert dk.X == {2, 3, 4, 5} and dk.Y[2] == {3, 4, 5}
    with pytest.raises(ValueError):
        deficiency_sets(C6, 2)


@settings(max_examples=60, deadline=None)
@given(small_graphs(hi=7), st.integers(1, 2))
def test_deficiency_sets_match_enumeration(g, k):
    if lambda_k(g, k) == 0:
        return
    ds = deficiency_sets(g, k, force_exact=True)
    X, Y = deficiency_sets_by_enumeration(g, k)
    assert ds.X == X
    assert {x: ds.Y[x] for x in X} == {x: Y[x] for x in X}
    base = lambda_k(g, k)
    for x in X:
        for y in ds.Y[x]:
            if not g.has_edge(x, y):
                assert lambda_k(g.add_edge(x, y), k) < base


def test_inner_approximation_is_sound():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(6, 11))
        g = Graph(n, [e for e in itertools.combinations(range(n), 2) if rng.random() < 0.3])
        for k in (1, 2):
            if lambda_k(g, k) == 0:
                continue
            approx = deficiency_sets(g, k, exact_threshold=(0, 0))
            exact = deficiency_sets(g, k, force_exact=True)
            assert not approx.exact
            assert approx.X <= exact.X
            for x, ys in approx.Y.items():
                assert ys <= exact.Y[x]


def test_target_set_examples():
    assert target_set_k(C6, 2) == []
    assert sorted(target_set_k(Graph(4, [(0, 1), (0, 2), (0, 3)]), 1)) == [(1, 2), (1, 3), (2, 3)]
    assert sorted(target_set_k(K24, 1)) == sorted(itertools.combinations(range(2, 6), 2))


def test_posa_example():
    f = KMatching(1, 6, frozenset({(0, 4), (1, 5)}))
    res = posa_set_S(K24, 1, f, x=2, y=3, Y_x={3, 4, 5})
    assert res.S == {0, 1, 3, 4, 5}
    assert res.e_S == 6 and res.meets_density and res.meets_overlap
    with pytest.raises(ValueError):
        posa_set_S(STAR, 2)


def test_posa_preprocessing_single_deficient_vertex():
    # K5 minus one edge, k=3: only one vertex can stay deficient
    g = Graph(5, [e for e in itertools.combinations(range(5), 2) if e != (0, 1)])
    f = max_k_matching(g, 2)
    if len(f.deficient()) == 1:
        res = posa_set_S(g, 2, f)
        assert res.preprocessed


def test_certificate_examples():
    f = KMatching(2, 4, frozenset({(0, 1), (0, 2)}))
    rep = certificate_partition(STAR, 2, f)
    assert rep.partition.layers[0] == {1, 2, 3} and rep.partition.layers[1] == {0}
    assert rep.partition.A == {1, 2, 3} and rep.partition.B == {0}
    assert rep.beta == 4 == 2 * lambda_k(STAR, 2)
    fk = KMatching(1, 6, frozenset({(0, 4), (1, 5)}))
    rk = certificate_partition(K24, 1, fk)
    assert rk.partition.layers[:3] == [{2, 3}, {0, 1}, {4, 5}]
    assert rk.beta == 2
    js = rk.to_json()
    for key in ("layers", "A", "B", "beta", "lambda", "c_4r1", "cross_edges", "claims_verified"):
        assert key in js


def test_certificate_is_component_local():
    g = Graph(7, [(0, 1), (1, 2), (0, 2), (3, 4), (3, 5), (3, 6)])
    rep = certificate_partition(g, 2)
    assert all(layer <= {3, 4, 5, 6} for layer in rep.partition.layers)
    assert all(rep.claims.values())


@settings(max_examples=60, deadline=None)
@given(small_graphs(hi=9), st.integers(1, 3))
def test_certificate_chain(g, k):
    if lambda_k(g, k) == 0:
        return
    rep = certificate_partition(g, k)
    assert rep.chain_slack >= 0
    assert all(rep.claims.values())
    e_ab = cut_stats(g, rep.partition.A, rep.partition.B)
    assert rep.beta == e_ab[1] + k * (len(rep.partition.A) - len(rep.partition.B)) - e_ab[2]


def test_augmentation_replay():
    rng = np.random.default_rng(11)
    for _ in range(40):
        n = int(rng.integers(4, 11))
        g = Graph(n, [e for e in itertools.combinations(range(n), 2) if rng.random() < 0.35])
        for k in (1, 2, 3):
            stats = MatchingStats()
            final = max_k_matching(g, k, stats)
            cur = set(final.edges)
            # undo the walks in reverse: each undone walk shrinks F by exactly one edge
            for walk in reversed(stats.walks):
                prev = symmetric_difference(cur, walk)
                assert len(prev) == len(cur) - 1
                assert is_alternating_walk(g, prev, walk) == (UP, UP)
                deg = [0] * n
                for u, v in cur:
                    deg[u] += 1
                    deg[v] += 1
                assert max(deg, default=0) <= k
                cur = prev


def test_matches_exhaustive_on_corpus_sample():
    for g in connected_corpus(6):
        for k in (1, 2, 3):
            assert lambda_k(g, k) == lambda_k_exhaustive(g, k)
