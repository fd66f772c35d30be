"""Configuration-model sampling and the backward edge-removal chain."""

from __future__ import annotations

import csv
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .degseq import Cutoff, DegreeProfile, DegreeSequence, profile_of
from .graph import Edge, Graph, MultiGraph, norm_edge


class SamplingError(RuntimeError):
    """Rejection sampling ran out of attempts."""


def _degrees(seq: DegreeSequence | Sequence[int]) -> list[int]:
    return list(seq.degrees) if isinstance(seq, DegreeSequence) else [int(d) for d in seq]


def lambda_param(seq: DegreeSequence | Sequence[int]) -> Fraction:
    """sum d(d-1) / (2 sum d), exactly."""
    degs = _degrees(seq)
    total = sum(degs)
    if total <= 0:
        raise ValueError("degree sum must be positive")
    return Fraction(sum(d * (d - 1) for d in degs), 2 * total)


def simple_probability_estimate(seq: DegreeSequence | Sequence[int]) -> float:
    lam = float(lambda_param(seq))
    return math.exp(-lam * (lam + 1))


def _points(degs: list[int]) -> np.ndarray:
    if sum(degs) % 2:
        raise ValueError("degree sum is odd")
    if any(d < 0 for d in degs):
        raise ValueError("negative degree")
    return np.repeat(np.arange(len(degs), dtype=np.int64), degs)


def sample_configuration(seq: DegreeSequence | Sequence[int], rng: np.random.Generator) -> MultiGraph:
    """Uniform perfect matching of the degree points, projected to a multigraph.

    Vertex ``i`` receives ``seq[i]`` points, so pass a per-vertex list when the
    labelling matters.
    """
    degs = _degrees(seq)
    pts = rng.permutation(_points(degs))
    pairs = pts.reshape(-1, 2)
    return MultiGraph(len(degs), map(tuple, pairs.tolist()))


def _first_simple(batch: np.ndarray, n: int) -> int:
    """Index of the first simple pairing in a batch of permuted point rows, or -1."""
    a = batch[:, 0::2]
    b = batch[:, 1::2]
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    loops = (lo == hi).any(axis=1)
    keys = np.sort(lo * n + hi, axis=1)
    dup = (keys[:, 1:] == keys[:, :-1]).any(axis=1) if keys.shape[1] > 1 else np.zeros(len(keys), bool)
    ok = np.flatnonzero(~(loops | dup))
    return int(ok[0]) if ok.size else -1


@dataclass
class SimpleSample:
    graph: Graph
    attempts: int
    exact_uniform: bool = True


def default_max_tries(seq: DegreeSequence | Sequence[int]) -> int:
    lam = float(lambda_param(seq))
    return math.ceil(1e4 * math.exp(lam * (lam + 1)))


def sample_simple_stats(
    seq: DegreeSequence | Sequence[int],
    rng: np.random.Generator,
    max_tries: int | None = None,
    batch: int | None = None,
) -> SimpleSample:
    """Rejection-sample configurations until one is simple.

    Pairings are drawn in vectorized batches; taking the first simple row of
    each batch is the same as drawing them one at a time.
    """
    degs = _degrees(seq)
    pts = _points(degs)
    n = len(degs)
    if pts.size == 0:
        return SimpleSample(Graph(n), 1)
    if max_tries is None:
        max_tries = default_max_tries(degs)
    if batch is None:
        expected = 1 / max(simple_probability_estimate(degs), 1e-12)
        batch = int(min(max(16, expected), max(1, 4_000_000 // pts.size)))
    tries = 0
    while tries < max_tries:
        rows = min(batch, max_tries - tries)
        perm = rng.permuted(np.broadcast_to(pts, (rows, pts.size)), axis=1)
        hit = _first_simple(perm, n)
        if hit >= 0:
            tries += hit + 1
            pairs = perm[hit].reshape(-1, 2)
            return SimpleSample(Graph(n, map(tuple, pairs.tolist())), tries)
        tries += rows
    raise SamplingError(f"no simple graph after {max_tries} configurations")


def sample_simple(
    seq: DegreeSequence | Sequence[int],
    rng: np.random.Generator,
    max_tries: int | None = None,
) -> Graph:
    return sample_simple_stats(seq, rng, max_tries).graph


def sample_graph(
    seq: DegreeSequence | Sequence[int],
    rng: np.random.Generator,
    rejection_limit: float = 2e5,
) -> SimpleSample:
    """Simple graph with the given degrees.

    Uses exact rejection when the expected number of configurations is below
    ``rejection_limit``; otherwise falls back to networkx's sequential
    sampler, which is only asymptotically uniform (flagged in the result).
    """
    degs = _degrees(seq)
    if sum(degs) == 0 or 1 / simple_probability_estimate(degs) <= rejection_limit:
        return sample_simple_stats(degs, rng)
    import networkx as nx

    seed = int(rng.integers(2**32))
    for attempt in range(1, 21):
        try:
            h = nx.random_degree_sequence_graph(degs, seed=seed + attempt, tries=10)
        except nx.NetworkXUnfeasible:
            continue
        except nx.NetworkXError:
            continue
        return SimpleSample(Graph(len(degs), h.edges()), attempt, exact_uniform=False)
    raise SamplingError("sequential sampler failed")


def sample_profile_graph(profile: DegreeProfile, rng: np.random.Generator, **kw) -> SimpleSample:
    """Sample with the given profile, then relabel by a uniform permutation."""
    degs = list(profile.to_sequence().degrees)
    res = sample_graph(degs, rng, **kw)
    perm = rng.permutation(len(degs)).tolist()
    return SimpleSample(res.graph.relabel(perm), res.attempts, res.exact_uniform)


# -- backward chain ------------------------------------------------------------


def phi_edges(g: Graph, cutoff: Cutoff) -> list[Edge]:
    """Edges whose endpoints both have degree in delta+1..D."""
    lo, hi = cutoff.delta + 1, cutoff.D
    deg = g.degrees()
    return [(u, v) for u, v in g.edges() if lo <= deg[u] <= hi and lo <= deg[v] <= hi]


def phi(g: Graph, cutoff: Cutoff) -> int:
    return len(phi_edges(g, cutoff))


def phi_delta_bounds_check(g: Graph, cutoff: Cutoff) -> bool:
    """phi(G-e) <= phi(G) <= phi(G-e) + 2 delta + 1 for every removable edge."""
    edges = phi_edges(g, cutoff)
    base = len(edges)
    for u, v in edges:
        after = phi(g.remove_edge(u, v), cutoff)
        if not after <= base <= after + 2 * cutoff.delta + 1:
            return False
    return True


@dataclass(frozen=True)
class ChainStep:
    step: int
    u: int
    v: int
    du: int
    dv: int
    phi_after: int


@dataclass
class ChainState:
    graph: Graph
    base_profile: DegreeProfile
    g: dict[int, int] = field(default_factory=dict)
    steps: int = 0
    trace: list[ChainStep] = field(default_factory=list)
    failed: bool = False
    initial: Graph | None = None

    def g_value(self, d: int) -> int:
        return self.g.get(d, 0)


def apply_g(base: DegreeProfile, g: dict[int, int]) -> dict[int, int]:
    """Profile base - sum_d g(d) i_d as a plain dict (may hold negatives if g is bogus)."""
    counts = dict(base.counts)
    for d, c in g.items():
        counts[d] = counts.get(d, 0) - c
        counts[d - 1] = counts.get(d - 1, 0) + c
    return {d: c for d, c in counts.items() if c}


def recover_g(base: DegreeProfile, current: DegreeProfile) -> dict[int, int]:
    """The unique g with current = base - sum g(d) i_d, via prefix sums."""
    lo = min(base.min_degree, current.min_degree) if current.n else base.min_degree
    hi = max(base.max_degree, current.max_degree)
    g: dict[int, int] = {}
    acc = 0
    for d in range(lo + 1, hi + 1):
        acc += current.get(d - 1) - base.get(d - 1)
        if acc:
            g[d] = acc
    return g


def profile_identity_holds(state: ChainState) -> bool:
    cur = profile_of(state.graph.degrees())
    if apply_g(state.base_profile, state.g) != dict(cur.counts):
        return False
    if any(c < 0 for c in state.g.values()):
        return False
    base_m = state.base_profile.total // 2
    return sum(state.g.values()) == 2 * (base_m - state.graph.m)


def start_chain(g0: Graph, profile: DegreeProfile) -> ChainState:
    if profile_of(g0.degrees()) != profile:
        raise ValueError("graph degree profile does not match the base profile")
    return ChainState(graph=g0, base_profile=profile, initial=g0)


def chain_step(state: ChainState, cutoff: Cutoff, rng: np.random.Generator, checks: bool = False) -> bool:
    """Remove one uniform edge of the current removable set. Returns False on failure."""
    if state.failed:
        return False
    g = state.graph
    cand = phi_edges(g, cutoff)
    if not cand:
        state.failed = True
        return False
    u, v = cand[int(rng.integers(len(cand)))]
    du, dv = g.degree(u), g.degree(v)
    h = g.remove_edge(u, v)
    phi_after = phi(h, cutoff)
    if checks:
        before = len(cand)
        if not phi_after <= before <= phi_after + 2 * cutoff.delta + 1:
            raise AssertionError(f"phi bound violated at step {state.steps + 1}")
    state.graph = h
    state.g[du] = state.g.get(du, 0) + 1
    state.g[dv] = state.g.get(dv, 0) + 1
    state.steps += 1
    state.trace.append(ChainStep(state.steps, u, v, du, dv, phi_after))
    if checks:
        if not profile_identity_holds(state):
            raise AssertionError(f"profile identity violated at step {state.steps}")
        if h.min_degree() < state.base_profile.min_degree:
            raise AssertionError(f"degree fell below minimum at step {state.steps}")
    return True


def backward_chain(
    g0: Graph,
    profile: DegreeProfile,
    cutoff: Cutoff,
    r: int,
    rng: np.random.Generator,
    checks: bool = False,
) -> ChainState:
    state = start_chain(g0, profile)
    for _ in range(r):
        if not chain_step(state, cutoff, rng, checks):
            break
    return state


def write_chain_trace(state: ChainState, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "u", "v", "d(u)_before", "d(v)_before", "phi_after"])
        for s in state.trace:
            w.writerow([s.step, s.u, s.v, s.du, s.dv, s.phi_after])


# -- candidate edges for re-adding -------------------------------------------------


def degree_pairs(g_vec: dict[int, int], lo: int, hi: int) -> list[tuple[int, int]]:
    """Pairs (k, l), k <= l in lo..hi, whose g-units can be spent by one added edge."""
    out = []
    for k in range(lo, hi + 1):
        if g_vec.get(k, 0) <= 0:
            continue
        for l in range(k, hi + 1):
            if k == l:
                if g_vec.get(k, 0) >= 2:
                    out.append((k, l))
            elif g_vec.get(l, 0) > 0:
                out.append((k, l))
    return out


def _pairs_between(g: Graph, deg: list[int], pairs: list[tuple[int, int]]) -> set[Edge]:
    by_deg: dict[int, list[int]] = {}
    for v, d in enumerate(deg):
        by_deg.setdefault(d, []).append(v)
    out: set[Edge] = set()
    for k, l in pairs:
        for u in by_deg.get(k - 1, ()):
            for v in by_deg.get(l - 1, ()):
                if u != v and not g.has_edge(u, v):
                    out.add(norm_edge(u, v))
    return out


def candidate_edges(state: ChainState, cutoff: Cutoff) -> tuple[list[Edge], list[Edge], list[tuple[int, int]]]:
    """(R, R1, Z): re-addable non-edges, those with both new degrees <= C, and the degree pairs."""
    if state.failed:
        raise ValueError("chain failed")
    g = state.graph
    deg = g.degrees()
    z = degree_pairs(state.g, cutoff.delta + 1, cutoff.D)
    r_all = _pairs_between(g, deg, z)
    r_one = _pairs_between(g, deg, [(k, l) for k, l in z if l <= cutoff.C])
    return sorted(r_all), sorted(r_one), z


@dataclass(frozen=True)
class RemovalStats:
    U: int
    W: int
    phi: int
    min_g_head: int


def claim_adg_stats(state: ChainState, cutoff: Cutoff) -> RemovalStats:
    """Counts of the vertex sets U and W plus phi and the head g-floor.

    U: vertices with C <= d0 <= D that were pushed down to the minimum degree.
    W: vertices with C <= d0 <= D having at least d0 - delta removable edges at the start.
    """
    if state.failed or state.initial is None:
        raise ValueError("needs a completed chain with its initial graph")
    g0, g = state.initial, state.graph
    delta = cutoff.delta
    d0 = g0.degrees()
    dr = g.degrees()
    phi0 = phi_edges(g0, cutoff)
    d0_phi = [0] * g0.n
    for u, v in phi0:
        d0_phi[u] += 1
        d0_phi[v] += 1
    in_range = [cutoff.C <= d0[v] <= cutoff.D for v in range(g0.n)]
    U = sum(1 for v in range(g0.n) if in_range[v] and dr[v] == delta)
    W = sum(1 for v in range(g0.n) if in_range[v] and d0_phi[v] >= d0[v] - delta)
    head = [state.g.get(d, 0) for d in range(delta + 1, cutoff.C + 1)]
    return RemovalStats(U, W, phi(g, cutoff), min(head) if head else 0)
