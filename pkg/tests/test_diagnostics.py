import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from fixdeg.corpus import connected_corpus, from_nx
from fixdeg.diagnostics import (
    beta_k_exact,
    beta_k_heuristic,
    beta_k_restricted,
    beta_value,
    best_partner,
    class_B_membership,
    diagnose,
    effective_girth,
    in_class_C,
    lemma_stob_check,
    shortest_cycle_per_vertex,
    sparsity_check,
    two_core,
    window_check,
)
from fixdeg.graph import Graph, cut_stats
from fixdeg.matching import total_deficiency
from fixdeg.oracles import beta_naive, shortest_cycle_through_vertex
from fixdeg.sampler import sample_profile_graph
from fixdeg.degseq import DegreeProfile

STAR = Graph(4, [(0, 1), (0, 2), (0, 3)])
K4 = Graph(4, itertools.combinations(range(4), 2))


def cycle(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


@st.composite
def small_graphs(draw, lo=1, hi=8):
    n = draw(st.integers(lo, hi))
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, [e for e, k in zip(pairs, keep) if k])


def test_beta_exact_examples():
    cert = beta_k_exact(STAR, 2)
    assert cert.value == 4 and cert.A == {1, 2, 3} and cert.B == {0}
    assert cert.recompute(STAR) == 4
    assert beta_k_exact(cycle(4), 2).value == 0
    assert beta_k_exact(K4, 2).value == 0
    with pytest.raises(ValueError):
        beta_k_exact(cycle(30), 2)


def test_closed_form_partner():
    for g in connected_corpus(6):
        for k in (1, 2):
            for a in range(1 << g.n):
                A = {v for v in range(g.n) if a >> v & 1}
                best = best_partner(g, k, A)
                rest = [v for v in range(g.n) if v not in A]
                top = max(beta_value(g, k, A, set(B)) for r in range(len(rest) + 1)
                          for B in itertools.combinations(rest, r)) if g.n <= 5 else None
                if top is not None:
                    assert beta_value(g, k, A, best) == top


@settings(max_examples=80, deadline=None)
@given(small_graphs(hi=7), st.integers(1, 3))
def test_beta_exact_matches_naive(g, k):
    assert beta_k_exact(g, k).value == beta_naive(g, k)


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(small_graphs(lo=4, hi=14), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_heuristic_is_a_lower_bound(g, k, seed):
    h = beta_k_heuristic(g, k, rng=np.random.default_rng(seed))
    assert h.mode == "lower_bound"
    assert h.recompute(g) == h.value
    assert h.value <= beta_k_exact(g, k).value


def test_heuristic_finds_skewed_imbalance():
    n = 120
    p = DegreeProfile({4: 2 * n // 3, 30: n // 3})
    rng = np.random.default_rng(7)
    hits = 0
    for _ in range(5):
        g = sample_profile_graph(p, rng).graph
        hits += beta_k_heuristic(g, 2, rng=rng).value > 0
    assert hits >= 4


def test_class_B_examples():
    c8 = class_B_membership(cycle(8), 2, 0.25, 0.05)
    assert c8.in_B
    restricted = beta_k_restricted(cycle(8), 2, 2)
    assert c8.in_B_tau_theta == (restricted.value <= -0.05 * 8)
    assert not class_B_membership(STAR, 2, 0.25, 0.05).in_B
    for g in (cycle(8), K4, STAR):
        res = class_B_membership(g, 2, 1.5, 0.05)
        assert res.in_B_tau_theta == res.in_B


def test_sparsity_examples():
    tree = from_nx(nx.balanced_tree(2, 3))
    assert sparsity_check(tree, gamma=1.0).ok
    res = sparsity_check(K4, gamma=1.0)
    assert not res.ok and res.S == frozenset(range(4))
    assert sparsity_check(K4, gamma=0.5).ok
    assert res.to_json() == {"S": [0, 1, 2, 3]}


@settings(max_examples=60, deadline=None)
@given(small_graphs(hi=10), st.sampled_from([0.3, 0.5, 1.0]))
def test_sparsity_matches_enumeration(g, gamma):
    limit = math.floor(gamma * g.n + 1e-9)
    viol = any(12 * cut_stats(g, S)[0] > 13 * len(S)
               for r in range(1, limit + 1) for S in itertools.combinations(range(g.n), r))
    res = sparsity_check(g, gamma=gamma)
    assert res.ok == (not viol)
    if not res.ok:
        assert len(res.S) <= limit and 12 * cut_stats(g, res.S)[0] > 13 * len(res.S)


def test_sparsity_large_graph_labels():
    g = from_nx(nx.random_regular_graph(3, 60, seed=1))
    res = sparsity_check(g, gamma=0.1, budget=2000)
    if res.ok:
        assert res.mode in ("exact", "heuristic")
    else:
        assert 12 * cut_stats(g, res.S)[0] > 13 * len(res.S)


def test_two_core():
    g = Graph(6, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)])
    assert two_core(g) == {0, 1, 2}


def test_girth_examples():
    c8 = effective_girth(cycle(8))
    assert c8.shortest_cycle == [8] * 8 and c8.psi == 7
    k4 = effective_girth(K4)
    assert k4.shortest_cycle == [3] * 4 and k4.psi == 2
    forest = effective_girth(from_nx(nx.balanced_tree(2, 2)))
    assert forest.psi == 7 and forest.acyclic_cap


@settings(max_examples=60, deadline=None)
@given(small_graphs(hi=10))
def test_shortest_cycle_matches_enumeration(g):
    assert shortest_cycle_per_vertex(g) == shortest_cycle_through_vertex(g)


@settings(max_examples=60, deadline=None)
@given(small_graphs(hi=10))
def test_psi_definition(g):
    prof = effective_girth(g)
    psi = prof.psi
    assert 1 <= psi <= max(g.n, 1)
    assert psi * prof.c_count(psi) <= g.n
    if psi < g.n:
        assert all(p * prof.c_count(p) > g.n for p in range(psi + 1, g.n + 1))


@settings(max_examples=40, deadline=None)
@given(small_graphs(lo=4, hi=10), st.data())
def test_decreasing_properties(g, data):
    if g.m == 0:
        return
    e = data.draw(st.sampled_from(g.edges()))
    h = g.remove_edge(*e)
    if sparsity_check(g, gamma=0.5).ok:
        assert sparsity_check(h, gamma=0.5).ok
    if in_class_C(g):
        assert in_class_C(h)


def test_window_examples():
    w = window_check(STAR, 2)
    assert w.beta == 4 and w.lam == 2 and w.lower_ok
    w = window_check(cycle(6), 2)
    assert w.beta == 0 and w.lam == 0 and w.lower_ok
    g = from_nx(nx.random_regular_graph(4, 12, seed=3))
    w = window_check(g, 2)
    assert w.lower_ok and w.beta <= w.total_deficiency
    assert w.psi_over_mu2 == pytest.approx(w.psi / w.mu ** 2)


def test_window_lower_half_uses_total_deficiency():
    p3 = Graph(3, [(0, 1), (1, 2)])
    w = window_check(p3, 1)
    # floor(kn/2) gives 2*lambda = 0 here while beta = 1
    assert w.beta == 1 and 2 * w.lam == 0 and w.total_deficiency == 1 and w.lower_ok


def test_lemma_stob_examples():
    k6 = Graph(6, itertools.combinations(range(6), 2))
    assert lemma_stob_check(k6, k6, 2, 0.4, 0.2, 0.05) in ("pass", "vacuous")
    assert lemma_stob_check(STAR, STAR, 2, 0.4, 0.2, 0.05) == "vacuous"
    rng = np.random.default_rng(5)
    outcomes = []
    for _ in range(10):
        g = from_nx(nx.random_regular_graph(6, 14, seed=int(rng.integers(1 << 30))))
        drop = rng.choice(g.m, size=int(0.05 * g.n), replace=False)
        h = Graph(g.n, [e for i, e in enumerate(g.edges()) if i not in set(drop.tolist())])
        outcomes.append(lemma_stob_check(g, h, 2, 0.45, 0.3, 0.05))
    assert "fail" not in outcomes


def test_diagnose_json_shape():
    rep = diagnose(STAR, k=2).to_json()
    assert set(rep) == {"beta", "lambda", "psi", "sparsity", "classes"}
    assert set(rep["beta"]) == {"value", "A", "B", "mode"}
    assert set(rep["classes"]) == {"B", "B_tau_theta", "S_gamma", "C"}
    assert rep["beta"]["value"] == 4 and rep["lambda"] == 2


def test_balance_never_exceeds_total_deficiency_on_corpus_sample():
    for g in connected_corpus(6):
        for k in (1, 2, 3):
            assert beta_k_exact(g, k).value <= total_deficiency(g, k)
