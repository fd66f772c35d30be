import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixdeg.degseq import Cutoff, DegreeProfile
from fixdeg.graph import Graph
from fixdeg.sprinkler import (
    all_non_edges,
    exact_nu_tiny,
    graphs_with_profile,
    r1_rule,
    sprinkling_experiment,
    tau_eps_check,
    uniform_measure,
    uniform_sprinkler,
)

TINY = [
    ({1: 2, 2: 2}, (2, 2, 1), 1),
    ({1: 2, 2: 2, 3: 2}, (2, 3, 1), 2),
    ({1: 2, 2: 2, 3: 2}, (2, 3, 1), 3),
    ({2: 3, 3: 2}, (3, 3, 2), 1),
]


def test_uniform_sprinkler_single_candidate():
    g = Graph(4, [e for e in itertools.combinations(range(4), 2) if e != (0, 1)])
    scheme = uniform_sprinkler(all_non_edges)
    assert scheme.measure(g) == {(0, 1): Fraction(1)}
    assert scheme.draw(g, np.random.default_rng(0)) == (0, 1)
    assert list(scheme.stream(g, np.random.default_rng(0), 5)) == [(0, 1)]


def test_r1_halts_when_nothing_was_removed():
    prof = DegreeProfile({2: 4})
    g = Graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    scheme = uniform_sprinkler(r1_rule(prof, Cutoff(3, 3, 2)))
    assert scheme.measure(g) == {}
    assert scheme.draw(g, np.random.default_rng(0)) is None


def test_uniform_is_tau_eps_random():
    n = 12
    g = Graph(n, [(i, i + 1) for i in range(n - 1)])
    mu = uniform_measure(g.non_edges())
    assert sum(mu.values()) == 1
    universe = g.non_edges()
    for eps in (0.1, 0.3, 0.5):
        # the lightest ceil(eps N) non-edges carry ceil(eps N)/N >= eps
        assert tau_eps_check(mu, eps, eps, universe=universe).passed
        assert not tau_eps_check(mu, eps + 2 / len(universe), eps, universe=universe).passed


def test_tau_eps_examples():
    cands = [(0, i) for i in range(1, 11)]
    res = tau_eps_check(uniform_measure(cands), 0.4, 0.5)
    assert res.passed and res.worst_mass == pytest.approx(0.5)
    point = {e: Fraction(int(i == 0)) for i, e in enumerate(cands)}
    res = tau_eps_check(point, 0.1, 0.5, universe=cands)
    assert not res.passed and res.worst_mass == 0 and len(res.witnesses[0]) == 5
    assert tau_eps_check(point, 0.0, 0.9, universe=cands).passed
    sampled = tau_eps_check(point, 0.1, 0.5, mode="sampled", universe=cands, rng=np.random.default_rng(1))
    assert not sampled.passed and all(len(S) == 5 for S in sampled.witnesses)
    with pytest.raises(ValueError):
        tau_eps_check(point, 0.1, 0.5, mode="bogus")


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=1, max_size=9), st.floats(0.05, 1.0), st.floats(0.0, 1.0))
def test_tau_eps_exact_matches_enumeration(raw, eps, tau):
    cands = [(0, i + 1) for i in range(len(raw))]
    if sum(raw) == 0:
        raw[0] = 1
    total = sum(raw)
    mu = {e: Fraction(w, total) for e, w in zip(cands, raw)}
    size = -(-eps * len(cands) // 1)
    want = all(sum(mu[e] for e in S) >= tau
               for r in range(int(size), len(cands) + 1) for S in itertools.combinations(cands, r))
    assert tau_eps_check(mu, tau, eps, universe=cands).passed == want


def test_graphs_with_profile_counts():
    # labelled paths on 4 vertices and labelled 5-cycles
    assert len(graphs_with_profile(4, DegreeProfile({1: 2, 2: 2}))) == 12
    assert len(graphs_with_profile(5, DegreeProfile({2: 5}))) == 12


def test_nu_path_example():
    t = exact_nu_tiny(DegreeProfile({1: 2, 2: 2}), Cutoff(2, 2, 1), 1)
    # removing the middle edge leaves one of the 3 perfect matchings
    assert len(t.mu_s) == 3 and all(p == Fraction(1, 3) for p in t.mu_s.values())
    for mask in t.mu_s:
        row = [e for e in t.entries if e.graph == mask]
        assert len(row) == 4
        assert all(e.nu_chain == Fraction(1, 4) and e.in_R for e in row)


def test_nu_zero_steps_is_empty():
    t = exact_nu_tiny(DegreeProfile({1: 2, 2: 2}), Cutoff(2, 2, 1), 0)
    assert t.entries == []


def test_nu_size_limits():
    with pytest.raises(ValueError):
        exact_nu_tiny(DegreeProfile({2: 8}), Cutoff(3, 3, 2), 1)
    with pytest.raises(ValueError):
        exact_nu_tiny(DegreeProfile({1: 2, 2: 2}), Cutoff(2, 2, 1), 4)


@pytest.mark.parametrize("counts,cut,s", TINY)
def test_nu_identity(counts, cut, s):
    t = exact_nu_tiny(DegreeProfile(counts), Cutoff(*cut), s)
    assert t.entries
    assert t.identity_holds()
    assert t.sums_to_one()
    assert not t.support_mismatches()
    assert t.support_in_candidates()
    assert sum(t.mu_s.values()) + t.failed_mass == 1
    for mask, p in t.mu_s.items():
        assert t.mu_s_backward[mask] * sum(1 for e in t.entries if e.graph == mask and e.in_R) > 0
        assert p > 0


def test_nu_support_can_be_smaller_than_candidates():
    # at s = 2 some G + e with e a candidate is unreachable one level up
    t = exact_nu_tiny(DegreeProfile({1: 2, 3: 4}), Cutoff(2, 3, 1), 2)
    assert t.identity_holds() and t.sums_to_one() and t.support_in_candidates()
    support = sum(1 for e in t.entries if e.nu_chain > 0)
    cands = sum(1 for e in t.entries if e.in_candidates)
    assert support < cands


def test_hamiltonian_start_rate_one():
    g = Graph(5, [(i, (i + 1) % 5) for i in range(5)])
    stats = sprinkling_experiment(g, uniform_sprinkler(all_non_edges), 0, 5)
    assert stats.hamiltonian_rate == 1.0


def test_two_triangles_become_hamiltonian():
    g = Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    stats = sprinkling_experiment(g, uniform_sprinkler(all_non_edges), 20, 1000, seed=3)
    assert stats.hamiltonian_rate >= 0.99
    assert all(t.hits >= 1 for t in stats.trials if t.final_hamiltonian)


def test_experiment_seeded(tmp_path):
    g = Graph(8, [(i, (i + 1) % 4) for i in range(4)] + [(4 + i, 4 + (i + 1) % 4) for i in range(4)])
    a = sprinkling_experiment(g, uniform_sprinkler(all_non_edges), 6, 6, seed=11)
    b = sprinkling_experiment(g, uniform_sprinkler(all_non_edges), 6, 6, seed=11)
    assert a.trials == b.trials
    a.write_csv(tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0].startswith("trial,seed") and len(lines) == 7
