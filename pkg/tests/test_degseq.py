import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixdeg.degseq import (
    Cutoff,
    DegreeProfile,
    DegreeSequence,
    compute_cutoff,
    head_body_tail,
    light_tail_check,
    linearly_unbounded_check,
    max_degree_sum,
    parse_profile,
    profile_of,
    scale_profile,
)


def test_profile_of_examples():
    assert profile_of(DegreeSequence([3, 3, 3, 3])).counts == {3: 4}
    empty = profile_of(DegreeSequence([]))
    assert empty.counts == {} and empty.n == 0
    assert profile_of(DegreeSequence([7, 7, 4, 4, 4])).counts == {7: 2, 4: 3}


def test_max_degree_sum_examples():
    seq = DegreeSequence([7, 7, 4, 4, 4])
    assert max_degree_sum(seq, 2) == 14
    assert max_degree_sum(seq, 0) == 0
    assert max_degree_sum(seq, 5) == 26
    with pytest.raises(ValueError):
        max_degree_sum(seq, 6)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 15), max_size=10))
def test_max_degree_sum_exhaustive(degs):
    seq = DegreeSequence(degs)
    for s in range(len(degs) + 1):
        best = max((sum(c) for c in itertools.combinations(degs, s)), default=0)
        assert max_degree_sum(seq, s) == best


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 30), max_size=40))
def test_profile_roundtrip_on_sorted_sequences(degs):
    seq = DegreeSequence(sorted(degs, reverse=True))
    assert profile_of(seq).to_sequence().degrees == seq.degrees


def test_sequence_is_sorted_non_increasing():
    assert DegreeSequence([1, 3, 2]).degrees == (3, 2, 1)


def test_light_tail_examples():
    cubic27 = DegreeSequence([3] * 27)
    res = light_tail_check(cubic27, 3, 0.9)
    assert not res.passed and res.violation_t == 0  # 3 > 27^(1/6)
    assert light_tail_check(DegreeSequence([3] * 1000), 3, 0.9).passed
    n = 4096
    star = DegreeSequence([n - 1] + [1] * (n - 1))
    assert not light_tail_check(star, 1, 0.75).passed
    with pytest.raises(ValueError):
        light_tail_check(cubic27, 3, 0.4)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 3), min_size=729, max_size=800), st.floats(0.3, 4.0), st.floats(0.55, 0.95))
def test_light_tail_violation_is_first(degs, c, alpha):
    seq = DegreeSequence(degs)
    res = light_tail_check(seq, c, alpha)
    n = seq.n
    ok = [max_degree_sum(seq, t) <= c * n * (t / n) ** alpha for t in range(1, n + 1)]
    if all(ok):
        assert res.passed
    else:
        assert not res.passed and res.violation_t == ok.index(False) + 1


def test_head_body_tail_examples():
    p = DegreeProfile({4: 50, 7: 50})
    assert head_body_tail(p, Cutoff(7, 7, 4)) == (Fraction(7, 2),) * 3
    assert head_body_tail(DegreeProfile({4: 100}), Cutoff(5, 6, 4)) == (0, 0, 0)
    q = DegreeProfile({4: 60, 6: 30, 10: 10})
    assert head_body_tail(q, Cutoff(6, 8, 4)) == (Fraction(9, 5), Fraction(9, 5), Fraction(1))


def test_cutoff_invariant():
    with pytest.raises(ValueError):
        Cutoff(4, 6, 4)
    with pytest.raises(ValueError):
        Cutoff(7, 6, 4)


def test_compute_cutoff_examples():
    with pytest.raises(ValueError, match="average degree"):
        compute_cutoff(DegreeProfile({4: 100}), 0.5)
    assert compute_cutoff(DegreeProfile({4: 50, 7: 50}), 1.5, alpha=0.15) == Cutoff(7, 7, 4)
    with pytest.raises(ValueError):
        compute_cutoff(DegreeProfile({4: 50, 7: 50}), 1.5, alpha=0.5)
    with pytest.raises(ValueError):
        compute_cutoff(DegreeProfile({4: 50, 7: 50}), 1.5, mu=5)


def _partial(p, lo, hi):
    return sum(d * c for d, c in p.counts.items() if lo <= d <= hi)


def test_compute_cutoff_bracketing_pair():
    # every d p_d stays below alpha n, so the single heavy degree route is empty
    p = DegreeProfile({4: 500, **{d: 1 for d in range(5, 61)}})
    cut = compute_cutoff(p, 2.0, alpha=0.24, strategy="heavy_first")
    target = Fraction(2) * p.n / 8
    assert _partial(p, 5, cut.C - 1) < target <= _partial(p, 5, cut.C)
    assert _partial(p, cut.C, cut.D - 1) < target <= _partial(p, cut.C, cut.D)
    assert cut == Cutoff(17, 23, 4)


@st.composite
def admissible(draw):
    delta = draw(st.integers(1, 6))
    support = draw(st.lists(st.integers(delta + 1, delta + 30), min_size=1, max_size=5, unique=True))
    counts = {delta: draw(st.integers(1, 300))}
    for d in support:
        counts[d] = draw(st.integers(1, 300))
    p = DegreeProfile(counts)
    gap = float(p.average_degree()) - delta
    eps = draw(st.floats(0.05, 1.0)) * gap
    return p, eps


@settings(max_examples=150, deadline=None)
@given(admissible(), st.sampled_from(["small_tail", "heavy_first"]))
def test_compute_cutoff_output_always_valid(case, strategy):
    p, eps = case
    cut = compute_cutoff(p, eps, strategy=strategy)
    assert p.min_degree < cut.C <= cut.D
    assert all(x > 0 for x in head_body_tail(p, cut))


def test_linearly_unbounded_examples():
    assert linearly_unbounded_check([DegreeProfile({4: 50, 9: 50})], 9) == 0.5
    assert linearly_unbounded_check([DegreeProfile({4: 80})], 5) == 0
    fam = [DegreeProfile({4: 90, 12: 10}), DegreeProfile({4: 70, 12: 30})]
    assert linearly_unbounded_check(fam, 10) == pytest.approx(0.1)


def test_parse_profile_format():
    p = parse_profile("# comment\n4 50\n\n7 50  # trailing\n")
    assert p.counts == {4: 50, 7: 50}
    with pytest.raises(ValueError):
        parse_profile("4\n")


def test_scale_profile_keeps_size_and_parity():
    for n in (31, 60, 99, 160):
        p = scale_profile({4: 0.5, 7: 0.5}, n)
        assert p.n == n and p.total % 2 == 0
    assert scale_profile({4: 0.6, 8: 0.4}, 200).counts == {4: 120, 8: 80}
    assert math.isclose(float(scale_profile({3: 1.0}, 10).average_degree()), 3)
