"""Balance, sparsity, effective girth and the graph classes built on them."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .graph import Graph, as_mask, cut_stats, members, popcount

BETA_EXACT_MAX_N = 24
SPARSITY_EXACT_MAX_CORE = 24
_CHUNK = 1 << 16


def _popcount_u32(x: np.ndarray) -> np.ndarray:
    x = x - ((x >> 1) & 0x55555555)
    x = (x & 0x33333333) + ((x >> 2) & 0x33333333)
    x = (x + (x >> 4)) & 0x0F0F0F0F
    return ((x * 0x01010101) & 0xFFFFFFFF) >> 24


# -- balance -------------------------------------------------------------------------


@dataclass(frozen=True)
class BalanceCertificate:
    A: frozenset[int]
    B: frozenset[int]
    value: int
    k: int
    mode: str = "exact"  # exact | lower_bound

    def recompute(self, g: Graph) -> int:
        return beta_value(g, self.k, self.A, self.B)


def beta_value(g: Graph, k: int, A, B) -> int:
    _, e_ab, d_a = cut_stats(g, A, B)
    return e_ab + k * (popcount(as_mask(A)) - popcount(as_mask(B))) - d_a


def best_partner(g: Graph, k: int, A) -> frozenset[int]:
    """For fixed A the best B: outside vertices with more than k neighbours in A."""
    am = as_mask(A)
    masks = g.adjacency_masks()
    return frozenset(v for v in range(g.n) if not (am >> v) & 1 and popcount(masks[v] & am) > k)


def _beta_scan(g: Graph, k: int, min_size: int = 0) -> tuple[int, int] | None:
    """(best value, best mask) over masks A with |A| >= min_size, B chosen optimally."""
    n = g.n
    adj = np.array(g.adjacency_masks(), dtype=np.int64)
    deg = np.array(g.degrees(), dtype=np.int64)
    best_val, best_mask = None, None
    total = 1 << n
    for lo in range(0, total, _CHUNK):
        masks = np.arange(lo, min(total, lo + _CHUNK), dtype=np.int64)
        size = np.zeros(len(masks), dtype=np.int64)
        val = np.zeros(len(masks), dtype=np.int64)
        for v in range(n):
            inside = (masks >> v) & 1
            e_v = _popcount_u32(masks & adj[v])
            size += inside
            val += np.where(inside == 1, k - deg[v], np.maximum(e_v - k, 0))
        if min_size:
            val = np.where(size >= min_size, val, np.iinfo(np.int64).min)
        i = int(np.argmax(val))
        if min_size and size[i] < min_size:
            continue
        if best_val is None or val[i] > best_val:
            best_val, best_mask = int(val[i]), int(masks[i])
    if best_val is None:
        return None
    return best_val, best_mask


def beta_k_exact(g: Graph, k: int, max_n: int = BETA_EXACT_MAX_N) -> BalanceCertificate:
    """Maximum balance, enumerating A and taking the closed-form best B."""
    if g.n > max_n:
        raise ValueError(f"n={g.n} above the exact threshold {max_n}; use beta_k_heuristic")
    if g.n == 0:
        return BalanceCertificate(frozenset(), frozenset(), 0, k)
    val, mask = _beta_scan(g, k)
    A = frozenset(members(mask))
    return BalanceCertificate(A, best_partner(g, k, A), val, k)


def beta_k_restricted(g: Graph, k: int, min_size: int, max_n: int = BETA_EXACT_MAX_N) -> BalanceCertificate | None:
    """Maximum balance over |A| >= min_size; None when no such A exists."""
    if g.n > max_n:
        raise ValueError(f"n={g.n} above the exact threshold {max_n}")
    if min_size > g.n:
        return None
    res = _beta_scan(g, k, max(min_size, 0))
    if res is None:
        return None
    val, mask = res
    A = frozenset(members(mask))
    return BalanceCertificate(A, best_partner(g, k, A), val, k)


class _BalanceState:
    """Incremental evaluation of the closed-form balance while toggling A."""

    def __init__(self, g: Graph, k: int, A: set[int]):
        self.g, self.k = g, k
        self.inA = [False] * g.n
        self.eA = [0] * g.n
        self.deg = g.degrees()
        self.nbrs = [list(g.neighbors(v)) for v in range(g.n)]
        for v in A:
            self._add(v)

    def _add(self, v: int) -> None:
        self.inA[v] = True
        for u in self.nbrs[v]:
            self.eA[u] += 1

    def _remove(self, v: int) -> None:
        self.inA[v] = False
        for u in self.nbrs[v]:
            self.eA[u] -= 1

    def value(self) -> int:
        k = self.k
        tot = 0
        for v in range(self.g.n):
            if self.inA[v]:
                tot += k - self.deg[v]
            elif self.eA[v] > k:
                tot += self.eA[v] - k
        return tot

    def delta_toggle(self, v: int) -> int:
        k = self.k
        sign = -1 if self.inA[v] else 1
        d = 0
        # v's own term
        own_out = max(self.eA[v] - k, 0)
        own_in = k - self.deg[v]
        d += (own_in - own_out) if sign == 1 else (own_out - own_in)
        for u in self.nbrs[v]:
            if self.inA[u]:
                continue
            before = max(self.eA[u] - k, 0)
            after = max(self.eA[u] + sign - k, 0)
            d += after - before
        return d

    def toggle(self, v: int) -> None:
        if self.inA[v]:
            self._remove(v)
        else:
            self._add(v)

    def members(self) -> set[int]:
        return {v for v in range(self.g.n) if self.inA[v]}


def beta_k_heuristic(g: Graph, k: int, effort: int = 4, rng: np.random.Generator | None = None) -> BalanceCertificate:
    """Lower bound on the balance by hill climbing from degree-class seeds.

    Seeds: the empty set, each degree class, each lower degree prefix, and
    ``effort`` random low-degree subsets. Each seed is improved by single
    vertex toggles until no toggle helps.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    deg = g.degrees()
    levels = sorted(set(deg))
    seeds: list[set[int]] = [set()]
    for d in levels:
        seeds.append({v for v in range(g.n) if deg[v] == d})
        seeds.append({v for v in range(g.n) if deg[v] <= d})
    low = [v for v in range(g.n) if deg[v] == levels[0]] if levels else []
    for _ in range(effort):
        if not low:
            break
        keep = rng.random(len(low)) < 0.5
        seeds.append({v for v, kp in zip(low, keep) if kp})
    best_val, best_A = None, set()
    for seed in seeds:
        st = _BalanceState(g, k, seed)
        val = st.value()
        improved = True
        while improved:
            improved = False
            for v in range(g.n):
                d = st.delta_toggle(v)
                if d > 0:
                    st.toggle(v)
                    val += d
                    improved = True
        if best_val is None or val > best_val:
            best_val, best_A = val, st.members()
    A = frozenset(best_A)
    cert = BalanceCertificate(A, best_partner(g, k, A), 0, k, mode="lower_bound")
    return BalanceCertificate(cert.A, cert.B, cert.recompute(g), k, mode="lower_bound")


@dataclass
class ClassBResult:
    in_B: bool
    in_B_tau_theta: bool
    certificate: BalanceCertificate
    restricted: BalanceCertificate | None


def class_B_membership(g: Graph, k: int, tau: float, theta: float) -> ClassBResult:
    cert = beta_k_exact(g, k)
    in_b = cert.value <= 0
    min_size = math.ceil(tau * g.n - 1e-12)
    restricted = beta_k_restricted(g, k, min_size)
    ok = restricted is None or restricted.value <= -theta * g.n
    return ClassBResult(in_b, in_b and ok, cert, restricted)


# -- sparsity --------------------------------------------------------------------------


def two_core(g: Graph) -> set[int]:
    deg = g.degrees()
    alive = [True] * g.n
    queue = deque(v for v in range(g.n) if deg[v] < 2)
    for v in queue:
        alive[v] = False
    while queue:
        v = queue.popleft()
        for u in g.neighbors(v):
            if alive[u]:
                deg[u] -= 1
                if deg[u] < 2:
                    alive[u] = False
                    queue.append(u)
    return {v for v in range(g.n) if alive[v]}


@dataclass
class SparsityResult:
    ok: bool
    S: frozenset[int] | None
    mode: str  # exact | heuristic
    max_size: int

    def to_json(self):
        return {"ok": True} if self.ok else {"S": sorted(self.S) if self.S is not None else None}


def sparsity_check(g: Graph, c: Fraction | float = Fraction(13, 12), gamma: float = 1.0,
                   max_core: int = SPARSITY_EXACT_MAX_CORE, budget: int = 2_000_000) -> SparsityResult:
    """Look for S with |S| <= gamma n and e(S) > c |S|.

    A smallest violator has minimum degree 2 inside S (dropping a vertex of
    inner degree <= 1 keeps it violating when c >= 1), so only subsets of the
    2-core are searched. Up to ``max_core`` core vertices the search is a full
    enumeration; above that, connected subsets are grown with a state budget
    and a clean result is labelled heuristic.
    """
    c = Fraction(c).limit_denominator(10**6)
    max_size = math.floor(gamma * g.n + 1e-9)
    if c < 1:
        raise ValueError("the 2-core reduction needs c >= 1")
    core = sorted(two_core(g))
    if max_size < 3 or len(core) < 3:
        return SparsityResult(True, None, "exact", max_size)
    if len(core) <= max_core:
        return _sparsity_enumerate(g, core, c, max_size)
    return _sparsity_grow(g, core, c, max_size, budget)


def _sparsity_enumerate(g: Graph, core: list[int], c: Fraction, max_size: int) -> SparsityResult:
    h = len(core)
    pos = {v: i for i, v in enumerate(core)}
    local = np.zeros(h, dtype=np.int64)
    for v in core:
        m = 0
        for u in g.neighbors(v):
            if u in pos:
                m |= 1 << pos[u]
        local[pos[v]] = m
    best = None  # (density, -mask)
    total = 1 << h
    num, den = c.numerator, c.denominator
    for lo in range(0, total, _CHUNK):
        masks = np.arange(lo, min(total, lo + _CHUNK), dtype=np.int64)
        size = np.zeros(len(masks), dtype=np.int64)
        twice_e = np.zeros(len(masks), dtype=np.int64)
        for i in range(h):
            inside = (masks >> i) & 1
            size += inside
            twice_e += inside * _popcount_u32(masks & local[i])
        e = twice_e // 2
        viol = (size <= max_size) & (size > 0) & (e * den > num * size)
        if not viol.any():
            continue
        idx = np.flatnonzero(viol)
        dens = e[idx] / size[idx]
        j = idx[int(np.argmax(dens))]
        cand = (float(e[j] / size[j]), -int(masks[j]))
        if best is None or cand > best:
            best = cand
    if best is None:
        return SparsityResult(True, None, "exact", max_size)
    mask = -best[1]
    S = frozenset(core[i] for i in members(mask))
    return SparsityResult(False, S, "exact", max_size)


def _sparsity_grow(g: Graph, core: list[int], c: Fraction, max_size: int, budget: int) -> SparsityResult:
    core_set = set(core)
    seen: set[frozenset[int]] = set()
    work = 0
    best = None
    for v in core:
        stack = [frozenset([v])]
        while stack:
            S = stack.pop()
            if S in seen:
                continue
            seen.add(S)
            work += 1
            e = cut_stats(g, S)[0]
            if e > c * len(S):
                dens = Fraction(e, len(S))
                if best is None or dens > best[0]:
                    best = (dens, S)
            if len(S) >= max_size:
                continue
            frontier = {u for x in S for u in g.neighbors(x) if u in core_set and u not in S and u > v}
            for u in sorted(frontier, reverse=True):
                stack.append(S | {u})
            if work >= budget:
                break
        if work >= budget:
            break
    if best is not None:
        return SparsityResult(False, best[1], "exact", max_size)
    return SparsityResult(True, None, "exact" if work < budget else "heuristic", max_size)


# -- effective girth --------------------------------------------------------------------


@dataclass
class GirthProfile:
    shortest_cycle: list[float]
    psi: int
    acyclic_cap: bool = False

    def c_count(self, length: int) -> int:
        return sum(1 for c in self.shortest_cycle if c <= length)


def shortest_cycle_per_vertex(g: Graph) -> list[float]:
    """c_G(v) = min over edges vu of 1 + dist(v, u) in G - vu."""
    out = [math.inf] * g.n
    for v in range(g.n):
        best = math.inf
        for u in g.neighbors(v):
            # BFS from v avoiding the edge vu
            dist = {v: 0}
            queue = deque([v])
            found = math.inf
            while queue:
                x = queue.popleft()
                if dist[x] + 2 >= min(best, found):
                    break
                for y in g.neighbors(x):
                    if (x == v and y == u) or y in dist:
                        continue
                    dist[y] = dist[x] + 1
                    if y == u:
                        found = dist[y] + 1
                        break
                    queue.append(y)
                if found < math.inf:
                    break
            best = min(best, found)
        out[v] = best
    return out


def effective_girth(g: Graph) -> GirthProfile:
    cyc = shortest_cycle_per_vertex(g)
    n = g.n
    finite = sorted(c for c in cyc if c < math.inf)
    psi = 1
    for p in range(1, n + 1):
        count = sum(1 for c in finite if c <= p)
        if p * count <= n:
            psi = p
    return GirthProfile(cyc, psi, acyclic_cap=not finite)


def in_class_C(g: Graph, psi: int | None = None) -> bool:
    if psi is None:
        psi = effective_girth(g).psi
    return g.n >= 2 and psi >= math.sqrt(math.log(g.n))


# -- composite reports -----------------------------------------------------------------


@dataclass
class WindowReport:
    beta: int
    lam: int
    total_deficiency: int
    psi: int
    mu: float
    lower_ok: bool
    upper_value: float
    upper_ok: bool
    psi_over_mu2: float

    def to_json(self):
        return self.__dict__.copy()


def window_check(g: Graph, k: int) -> WindowReport:
    """Both halves of the balance/deficiency window; only the lower half is a theorem here."""
    from .matching import max_k_matching

    beta = beta_k_exact(g, k).value
    fm = max_k_matching(g, k)
    tot = k * g.n - 2 * fm.size
    psi = effective_girth(g).psi
    mu = g.m / g.n if g.n else 0.0
    upper = g.n / math.sqrt(psi) + max(0, beta)
    return WindowReport(
        beta, fm.deficiency, tot, psi, mu,
        lower_ok=beta <= tot,
        upper_value=upper,
        upper_ok=tot <= upper + 1e-9,
        psi_over_mu2=psi / mu**2 if mu else math.inf,
    )


def lemma_stob_check(g: Graph, h: Graph, k: int, gamma: float, theta: float, phi: float) -> str:
    """'pass', 'fail', or 'vacuous' when a hypothesis does not hold."""
    if h.n != g.n or any(not g.has_edge(u, v) for u, v in h.edges()):
        raise ValueError("H must be a spanning subgraph of G")
    if g.n > BETA_EXACT_MAX_N:
        raise ValueError("exact checks need small n")
    if k < 2 or not 2 * phi < theta or g.min_degree() < k + 2:
        return "vacuous"
    if h.m < g.m - phi * g.n:
        return "vacuous"
    if not sparsity_check(g, Fraction(13, 12), gamma).ok:
        return "vacuous"
    if not class_B_membership(g, k, gamma / 2, theta).in_B_tau_theta:
        return "vacuous"
    return "pass" if beta_k_exact(h, k).value <= 0 else "fail"


@dataclass
class DiagnosticReport:
    beta: BalanceCertificate
    lam: int
    psi: int
    sparsity: SparsityResult
    classes: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "beta": {
                "value": self.beta.value,
                "A": sorted(self.beta.A),
                "B": sorted(self.beta.B),
                "mode": self.beta.mode,
            },
            "lambda": self.lam,
            "psi": self.psi,
            "sparsity": self.sparsity.to_json(),
            "classes": self.classes,
        }


def diagnose(g: Graph, k: int = 2, gamma: float = 0.1, tau: float = 0.25, theta: float = 0.05,
             rng: np.random.Generator | None = None) -> DiagnosticReport:
    from .matching import lambda_k

    exact = g.n <= BETA_EXACT_MAX_N
    cert = beta_k_exact(g, k) if exact else beta_k_heuristic(g, k, rng=rng)
    lam = lambda_k(g, k)
    girth = effective_girth(g)
    sp = sparsity_check(g, Fraction(13, 12), gamma)
    classes = {
        "B": cert.value <= 0 if exact else (False if cert.value > 0 else None),
        "B_tau_theta": class_B_membership(g, k, tau, theta).in_B_tau_theta if exact else None,
        "S_gamma": sp.ok if (sp.mode == "exact" or not sp.ok) else None,
        "C": in_class_C(g, girth.psi),
    }
    return DiagnosticReport(cert, lam, girth.psi, sp, classes)
