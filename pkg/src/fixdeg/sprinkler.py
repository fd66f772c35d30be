"""Sprinkling schemes, (tau, eps)-randomness checks and exact re-addition measures on tiny graphs."""

from __future__ import annotations

import csv
import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .degseq import Cutoff, DegreeProfile, profile_of
from .graph import Edge, Graph, norm_edge

Measure = dict[Edge, Fraction]


@dataclass(frozen=True)
class SprinklingScheme:
    """Each round draws one non-edge from ``measure(current graph)``."""

    measure: Callable[[Graph], Measure]
    rounds: int | None = None

    def draw(self, g: Graph, rng: np.random.Generator) -> Edge | None:
        mu = self.measure(g)
        if not mu:
            return None
        edges = sorted(mu)
        w = np.array([float(mu[e]) for e in edges])
        total = w.sum()
        if total <= 0:
            return None
        return edges[int(rng.choice(len(edges), p=w / total))]

    def stream(self, g: Graph, rng: np.random.Generator, s: int | None = None) -> Iterator[Edge]:
        """Adaptive edge stream; assumes every drawn edge is then added."""
        cur = g
        limit = s if s is not None else self.rounds
        t = 0
        while limit is None or t < limit:
            e = self.draw(cur, rng)
            if e is None:
                return
            yield e
            cur = cur.add_edge(*e)
            t += 1


def uniform_measure(edges) -> Measure:
    edges = sorted(set(norm_edge(*e) for e in edges))
    if not edges:
        return {}
    p = Fraction(1, len(edges))
    return {e: p for e in edges}


def uniform_sprinkler(candidate_rule: Callable[[Graph], list[Edge]], rounds: int | None = None) -> SprinklingScheme:
    """Uniform measure on the rule's candidate set; an empty set halts the scheme."""
    return SprinklingScheme(lambda g: uniform_measure(candidate_rule(g)), rounds)


def all_non_edges(g: Graph) -> list[Edge]:
    return g.non_edges()


def r1_rule(base: DegreeProfile, cutoff: Cutoff) -> Callable[[Graph], list[Edge]]:
    """Candidates whose addition moves the profile back toward ``base`` using head degrees only."""
    from .sampler import ChainState, candidate_edges, recover_g

    def rule(g: Graph) -> list[Edge]:
        gv = recover_g(base, profile_of(g.degrees()))
        if any(c < 0 for c in gv.values()):
            return []
        return candidate_edges(ChainState(g, base, gv), cutoff)[1]

    return rule


# -- (tau, eps)-randomness ---------------------------------------------------------------


@dataclass
class RandomnessCheck:
    tau: float
    eps: float
    passed: bool
    mode: str
    worst_mass: float | None = None
    witnesses: list[list[Edge]] = field(default_factory=list)


def tau_eps_check(
    measure: Measure,
    tau: float,
    eps: float,
    mode: str = "exact",
    universe: list[Edge] | None = None,
    samples: int = 1000,
    rng: np.random.Generator | None = None,
) -> RandomnessCheck:
    """Does every S with |S| >= eps |universe| carry mass >= tau?

    Exact mode only needs the lightest ceil(eps |universe|) candidates, since
    adding edges never lowers the mass. Sampled mode draws random S of that
    size and can only report failures.
    """
    if universe is None:
        universe = sorted(measure)
    size = max(0, math.ceil(eps * len(universe) - 1e-12))
    weights = {e: measure.get(e, 0) for e in universe}
    if tau <= 0 or size == 0:
        return RandomnessCheck(tau, eps, True, mode, None)
    if size > len(universe):
        return RandomnessCheck(tau, eps, True, mode, None)
    if mode == "exact":
        light = sorted(universe, key=lambda e: (weights[e], e))[:size]
        mass = float(sum(weights[e] for e in light))
        return RandomnessCheck(tau, eps, mass >= tau, mode, mass, [] if mass >= tau else [light])
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    if rng is None:
        rng = np.random.default_rng(0)
    worst, witnesses = None, []
    for _ in range(samples):
        pick = rng.choice(len(universe), size=size, replace=False)
        S = [universe[i] for i in sorted(pick)]
        mass = float(sum(weights[e] for e in S))
        worst = mass if worst is None else min(worst, mass)
        if mass < tau:
            witnesses.append(S)
    return RandomnessCheck(tau, eps, not witnesses, mode, worst, witnesses)


# -- exact re-addition measure on tiny instances ------------------------------------------

MAX_TINY_N = 7
MAX_TINY_S = 3


class _PairIndex:
    def __init__(self, n: int):
        self.n = n
        self.pairs = list(combinations(range(n), 2))
        self.bit = {p: 1 << i for i, p in enumerate(self.pairs)}

    def degrees(self, mask: int) -> list[int]:
        deg = [0] * self.n
        for i, (u, v) in enumerate(self.pairs):
            if (mask >> i) & 1:
                deg[u] += 1
                deg[v] += 1
        return deg

    def graph(self, mask: int) -> Graph:
        return Graph(self.n, [p for i, p in enumerate(self.pairs) if (mask >> i) & 1])


def graphs_with_profile(n: int, profile: DegreeProfile) -> list[int]:
    """Edge masks of every labelled graph on n vertices with the given profile."""
    idx = _PairIndex(n)
    P = len(idx.pairs)
    masks = np.arange(1 << P, dtype=np.int64)
    deg = np.zeros((1 << P, n), dtype=np.int8)
    for i, (u, v) in enumerate(idx.pairs):
        b = ((masks >> i) & 1).astype(np.int8)
        deg[:, u] += b
        deg[:, v] += b
    deg.sort(axis=1)
    target = np.array(sorted(profile.to_sequence()), dtype=np.int8)
    hit = np.all(deg == target, axis=1)
    return masks[hit].tolist()


@dataclass
class NuEntry:
    graph: int  # edge mask
    edge: Edge
    nu_chain: Fraction
    nu_formula: Fraction
    in_R: bool
    in_candidates: bool


@dataclass
class NuTable:
    n: int
    profile: DegreeProfile
    cutoff: Cutoff
    s: int
    universe_size: int
    entries: list[NuEntry] = field(default_factory=list)
    mu_s: dict[int, Fraction] = field(default_factory=dict)
    mu_s_backward: dict[int, Fraction] = field(default_factory=dict)
    failed_mass: Fraction = Fraction(0)

    def identity_holds(self) -> bool:
        return all(e.nu_chain == e.nu_formula for e in self.entries)

    def sums(self) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for e in self.entries:
            out[e.graph] = out.get(e.graph, Fraction(0)) + e.nu_chain
        return out

    def sums_to_one(self) -> bool:
        return all(v == 1 for v in self.sums().values())

    def support_mismatches(self) -> list[NuEntry]:
        """Entries where positivity of nu disagrees with membership in R(G)."""
        return [e for e in self.entries if (e.nu_chain > 0) != e.in_R]

    def support_in_candidates(self) -> bool:
        return all(e.in_candidates for e in self.entries if e.nu_chain > 0)


def exact_nu_tiny(profile: DegreeProfile, cutoff: Cutoff, s: int) -> NuTable:
    """Exact nu_G(e) for every graph reachable after s removals, two ways.

    The chain route pushes the uniform start through s removal steps and
    reads nu off the joint law of consecutive states. The formula route
    computes mu_{s-1} as a sum over valid removal sequences (each removed
    edge in Phi of the graph it was removed from) and forms the normalised
    ratio mu_{s-1}(G+e)/phi(G+e).
    """
    from .sampler import ChainState, candidate_edges, recover_g

    n = profile.n
    if n > MAX_TINY_N or s > MAX_TINY_S:
        raise ValueError(f"exact nu needs n <= {MAX_TINY_N} and s <= {MAX_TINY_S}")
    if s < 0:
        raise ValueError("s must be >= 0")
    idx = _PairIndex(n)
    lo, hi = cutoff.delta + 1, cutoff.D
    base = graphs_with_profile(n, profile)
    if not base:
        raise ValueError("profile not realisable")
    N = len(base)
    table = NuTable(n, profile, cutoff, s, N)
    if s == 0:
        return table

    phi_cache: dict[int, list[int]] = {}

    def phi_bits(mask: int) -> list[int]:
        hit = phi_cache.get(mask)
        if hit is None:
            deg = idx.degrees(mask)
            hit = [
                b for (u, v), b in idx.bit.items()
                if mask & b and lo <= deg[u] <= hi and lo <= deg[v] <= hi
            ]
            phi_cache[mask] = hit
        return hit

    # chain route
    level: dict[int, Fraction] = {m: Fraction(1, N) for m in base}
    joint: dict[tuple[int, int], Fraction] = {}
    for step in range(1, s + 1):
        nxt: dict[int, Fraction] = {}
        joint = {}
        failed = Fraction(0)
        for mask, p in level.items():
            bits = phi_bits(mask)
            if not bits:
                failed += p
                continue
            share = p / len(bits)
            for b in bits:
                child = mask ^ b
                nxt[child] = nxt.get(child, Fraction(0)) + share
                joint[(child, b)] = joint.get((child, b), Fraction(0)) + share
        level = nxt
        table.failed_mass += failed
    table.mu_s = dict(level)

    # formula route
    base_set = set(base)
    memo: dict[tuple[int, int], Fraction] = {}

    def mu(t: int, mask: int) -> Fraction:
        key = (t, mask)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if t == 0:
            val = Fraction(1, N) if mask in base_set else Fraction(0)
        else:
            val = Fraction(0)
            for b in idx.bit.values():
                if mask & b:
                    continue
                up = mask | b
                bits = phi_bits(up)
                if b in bits:
                    val += mu(t - 1, up) / len(bits)
        memo[key] = val
        return val

    for mask in sorted(level):
        g = idx.graph(mask)
        deg = idx.degrees(mask)
        R = [
            b for (u, v), b in idx.bit.items()
            if not mask & b and lo <= deg[u] + 1 <= hi and lo <= deg[v] + 1 <= hi
        ]
        weights = {b: mu(s - 1, mask | b) / len(phi_bits(mask | b)) for b in R}
        total = sum(weights.values(), Fraction(0))
        table.mu_s_backward[mask] = total
        gv = recover_g(profile, profile_of(deg))
        cands = set(candidate_edges(ChainState(g, profile, gv), cutoff)[0])
        for (u, v), b in idx.bit.items():
            if mask & b:
                continue
            in_R = b in weights
            nu_c = joint.get((mask, b), Fraction(0)) / level[mask]
            nu_f = weights[b] / total if in_R and total else Fraction(0)
            table.entries.append(NuEntry(mask, (u, v), nu_c, nu_f, in_R, (u, v) in cands))
    return table


# -- experiments ---------------------------------------------------------------------------


@dataclass
class TrialResult:
    trial: int
    seed: int
    steps_used: int
    hits: int
    final_hamiltonian: bool
    final_k_factor: bool
    exited_S_gamma: bool
    exited_C: bool


@dataclass
class ExperimentStats:
    trials: list[TrialResult]

    @property
    def hamiltonian_rate(self) -> float:
        return sum(t.final_hamiltonian for t in self.trials) / len(self.trials) if self.trials else math.nan

    @property
    def k_factor_rate(self) -> float:
        return sum(t.final_k_factor for t in self.trials) / len(self.trials) if self.trials else math.nan

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial", "seed", "steps_used", "hits", "final_hamiltonian", "exited_S_gamma", "exited_C"])
            for t in self.trials:
                w.writerow([t.trial, t.seed, t.steps_used, t.hits, int(t.final_hamiltonian),
                            int(t.exited_S_gamma), int(t.exited_C)])


def sprinkling_experiment(
    g: Graph,
    scheme: SprinklingScheme,
    s: int,
    trials: int,
    seed: int = 0,
    k: int = 2,
    gamma: float = 0.1,
) -> ExperimentStats:
    """Run the augmentation pipeline under ``scheme`` for each trial.

    Trial i draws from its own stream seeded by (seed, i).
    """
    from .diagnostics import in_class_C, sparsity_check
    from .hamilton import augment_pipeline
    from .matching import lambda_k

    start_sparse = sparsity_check(g, gamma=gamma).ok
    start_C = in_class_C(g)
    out = []
    for i in range(trials):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, i])))
        final, trace = augment_pipeline(g, scheme.stream(g, rng, s), s)
        out.append(TrialResult(
            trial=i,
            seed=seed,
            steps_used=trace.stopped_at,
            hits=sum(trace.hits),
            final_hamiltonian=trace.hamiltonian,
            final_k_factor=lambda_k(final, k) == 0,
            exited_S_gamma=start_sparse and not sparsity_check(final, gamma=gamma).ok,
            exited_C=start_C and not in_class_C(final),
        ))
    return ExperimentStats(out)
