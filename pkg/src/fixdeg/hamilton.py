"""Hamilton cycles, 2-factors, component minimisation and the merge-walk sets."""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field

import numpy as np

from .graph import Edge, Graph, norm_edge, popcount
from .walks import DOWN, EdgeIndex, walk_states

EXACT_MAX_N = 20


def _components(n: int, edges: Iterable[Edge]) -> list[list[int]]:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        parent[find(u)] = find(v)
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return list(groups.values())


def kappa(n: int, edges: Iterable[Edge]) -> int:
    """Number of connected components of the spanning graph (V, edges)."""
    return len(_components(n, edges))


def mask_kappa(n: int, ends: list[Edge], mask: int) -> int:
    """Component count of (V, edges selected by ``mask``), edges numbered as in ``ends``."""
    parent = list(range(n))
    comps = n
    while mask:
        low = mask & -mask
        mask ^= low
        u, v = ends[low.bit_length() - 1]
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        if u != v:
            parent[u] = v
            comps -= 1
    return comps


def _cycle_order(n: int, edges: Iterable[Edge], comp: list[int]) -> list[int]:
    adj: dict[int, list[int]] = {v: [] for v in comp}
    for u, v in edges:
        if u in adj:
            adj[u].append(v)
            adj[v].append(u)
    start = min(comp)
    order, prev, cur = [start], None, start
    while True:
        nxt = [x for x in adj[cur] if x != prev]
        if not nxt or nxt[0] == start and len(order) == len(comp):
            return order
        # at the start vertex pick the smaller neighbour for a canonical direction
        step = min(nxt) if prev is None else nxt[0]
        if step == start:
            return order
        prev, cur = cur, step
        order.append(cur)


@dataclass(frozen=True)
class TwoFactor:
    n: int
    edges: frozenset[Edge]
    components: tuple[tuple[int, ...], ...] = field(init=False)

    def __post_init__(self):
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        if any(d != 2 for d in deg):
            raise ValueError("every vertex needs degree 2 in a 2-factor")
        comps = sorted(_components(self.n, self.edges))
        cycles = tuple(tuple(_cycle_order(self.n, self.edges, c)) for c in comps)
        if any(len(c) < 3 for c in cycles):
            raise ValueError("2-factor cycles have length >= 3")
        object.__setattr__(self, "components", cycles)

    @property
    def kappa(self) -> int:
        return len(self.components)

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[list[int]]) -> TwoFactor:
        edges = set()
        for cyc in cycles:
            for i, v in enumerate(cyc):
                edges.add(norm_edge(v, cyc[(i + 1) % len(cyc)]))
        return cls(n, frozenset(edges))

    def is_subgraph_of(self, g: Graph) -> bool:
        return all(g.has_edge(u, v) for u, v in self.edges)


# -- subset dynamic programme -----------------------------------------------------------


def _layers(n: int) -> list[np.ndarray]:
    masks = np.arange(1 << n, dtype=np.int64)
    pc = np.zeros(1 << n, dtype=np.int8)
    for v in range(n):
        pc += ((masks >> v) & 1).astype(np.int8)
    order = np.argsort(pc, kind="stable")
    bounds = np.searchsorted(pc[order], np.arange(n + 2))
    return [order[bounds[p]:bounds[p + 1]].astype(np.int64) for p in range(n + 1)]


def path_ends(g: Graph, start: int | None = None, layers: list[np.ndarray] | None = None) -> np.ndarray:
    """ends[M] = bitmask of e such that G[M] has a Hamilton path from the start to e.

    The start is ``start`` when given (masks without it stay 0), otherwise the
    lowest vertex of each mask.
    """
    n = g.n
    adj = np.array(g.adjacency_masks(), dtype=np.int64)
    ends = np.zeros(1 << n, dtype=np.int64)
    if start is None:
        for v in range(n):
            ends[1 << v] = 1 << v
    else:
        ends[1 << start] = 1 << start
    if layers is None:
        layers = _layers(n)
    for p in range(2, n + 1):
        L = layers[p]
        if start is None:
            low = L & -L
        else:
            L = L[(L >> start) & 1 == 1]
            low = np.full(len(L), 1 << start, dtype=np.int64)
        acc = np.zeros(len(L), dtype=np.int64)
        for e in range(n):
            bit = np.int64(1 << e)
            sel = ((L & bit) != 0) & (low != bit)
            if not sel.any():
                continue
            prev = ends[L[sel] ^ bit]
            hit = (prev & adj[e]) != 0
            acc[sel] |= np.where(hit, bit, 0)
        ends[L] = acc
    return ends


def _walk_back(ends: np.ndarray, adj: list[int], mask: int, last: int, start: int) -> list[int]:
    """Recover a Hamilton path of G[mask] from ``start`` to ``last``."""
    path = [last]
    while mask != (1 << start):
        prev_mask = mask ^ (1 << last)
        cand = int(ends[prev_mask]) & adj[last]
        nxt = (cand & -cand).bit_length() - 1
        path.append(nxt)
        mask, last = prev_mask, nxt
    path.reverse()
    return path


class TwoFactorSolver:
    """Exact κ₂ and Hamiltonicity for n <= 20 from one subset DP."""

    def __init__(self, g: Graph):
        if g.n > EXACT_MAX_N:
            raise ValueError(f"exact 2-factor search limited to n <= {EXACT_MAX_N}")
        self.g = g
        self.n = g.n
        self.adj = g.adjacency_masks()
        self.layers = _layers(self.n) if self.n else []
        self.ends = path_ends(g, layers=self.layers) if self.n else np.zeros(1, dtype=np.int64)
        adj_np = np.array(self.adj, dtype=np.int64) if self.n else np.zeros(0, dtype=np.int64)
        masks = np.arange(1 << self.n, dtype=np.int64)
        low = masks & -masks
        low_idx = np.zeros(len(masks), dtype=np.int64)
        for v in range(self.n):
            low_idx[low == (1 << v)] = v
        pc = np.zeros(len(masks), dtype=np.int64)
        for v in range(self.n):
            pc += (masks >> v) & 1
        closing = adj_np[low_idx] if self.n else np.zeros(len(masks), dtype=np.int64)
        self.cyc = (pc >= 3) & ((self.ends & closing) != 0)
        self.cycles_by_low: list[np.ndarray] = []
        cyc_masks = masks[self.cyc]
        cyc_low = low_idx[self.cyc]
        for v in range(self.n):
            sel = cyc_masks[cyc_low == v]
            # larger cycles first so good covers are found early
            sel = sel[np.argsort(-np.array([popcount(int(x)) for x in sel], dtype=np.int64), kind="stable")]
            self.cycles_by_low.append(sel)
        self._memo: dict[int, tuple[float, int]] = {0: (0, 0)}
        self._from: dict[int, np.ndarray] = {}

    def min_cover(self, mask: int) -> float:
        """Fewest vertex-disjoint cycles covering ``mask`` exactly; inf if none."""
        return self._cover(mask)[0]

    def _cover(self, mask: int) -> tuple[float, int]:
        hit = self._memo.get(mask)
        if hit is not None:
            return hit
        if self.cyc[mask]:
            res = (1, mask)
        else:
            low = (mask & -mask).bit_length() - 1
            cands = self.cycles_by_low[low]
            cands = cands[(cands & ~mask) == 0]
            res = (math.inf, 0)
            for c in cands.tolist():
                rest = self._cover(mask ^ c)[0]
                if 1 + rest < res[0]:
                    res = (1 + rest, c)
                    if res[0] == 2:
                        break
        self._memo[mask] = res
        return res

    def cycle_in(self, mask: int) -> list[int]:
        low = (mask & -mask).bit_length() - 1
        cand = int(self.ends[mask]) & self.adj[low]
        last = (cand & -cand).bit_length() - 1
        return _walk_back(self.ends, self.adj, mask, last, low)

    def cover_cycles(self, mask: int) -> list[list[int]] | None:
        if self.min_cover(mask) == math.inf:
            return None
        out = []
        while mask:
            _, c = self._cover(mask)
            out.append(self.cycle_in(c))
            mask ^= c
        return out

    def kappa2(self) -> tuple[int, TwoFactor] | None:
        full = (1 << self.n) - 1
        cycles = self.cover_cycles(full) if self.n else None
        if cycles is None:
            return None
        tf = TwoFactor.from_cycles(self.n, cycles)
        return tf.kappa, tf

    def hamilton_cycle(self) -> list[int] | None:
        full = (1 << self.n) - 1
        if self.n < 3 or not self.cyc[full]:
            return None
        return self.cycle_in(full)

    def paths_from(self, w: int) -> np.ndarray:
        hit = self._from.get(w)
        if hit is None:
            hit = path_ends(self.g, start=w, layers=self.layers)
            self._from[w] = hit
        return hit

    def kappa2_with_edge(self, w: int, z: int) -> float:
        """min κ over 2-factors of G + wz that use wz; inf if none."""
        if w == z:
            raise ValueError("w and z must differ")
        full = (1 << self.n) - 1
        ends = self.paths_from(w)
        best = math.inf
        for M in np.flatnonzero((ends >> z) & 1).tolist():
            if popcount(M) < 3:
                continue
            best = min(best, 1 + self.min_cover(full ^ M))
            if best == 1:
                break
        return best

    def two_factor_with_edge(self, w: int, z: int) -> TwoFactor | None:
        """An optimal 2-factor of G + wz containing wz."""
        full = (1 << self.n) - 1
        ends = self.paths_from(w)
        best, arg = math.inf, None
        for M in np.flatnonzero((ends >> z) & 1).tolist():
            if popcount(M) < 3:
                continue
            val = 1 + self.min_cover(full ^ M)
            if val < best:
                best, arg = val, M
        if arg is None or best == math.inf:
            return None
        path = _walk_back(ends, self.adj, arg, z, w)
        cycles = [path] + (self.cover_cycles(full ^ arg) or [])
        return TwoFactor.from_cycles(self.n, cycles)

    def Z(self, w: int, k2: int | None = None) -> set[int]:
        if k2 is None:
            res = self.kappa2()
            if res is None:
                raise ValueError("graph has no 2-factor")
            k2 = res[0]
        return {z for z in range(self.n) if z != w and not self.g.has_edge(w, z) and self.kappa2_with_edge(w, z) < k2}


# -- Hamiltonicity ----------------------------------------------------------------------


@dataclass
class HamiltonResult:
    hamiltonian: bool | None
    cycle: list[int] | None
    method: str
    exact: bool

    def __bool__(self) -> bool:
        return bool(self.hamiltonian)


def _dfs_cycle(g: Graph, budget: int) -> list[int] | None | bool:
    """Warnsdorff-ordered backtracking. Returns a cycle, False if exhausted, None on budget."""
    n = g.n
    nbrs = [sorted(g.neighbors(v)) for v in range(n)]
    start = min(range(n), key=lambda v: (len(nbrs[v]), v))
    on_path = [False] * n
    path = [start]
    on_path[start] = True
    free_deg = [len(nbrs[v]) for v in range(n)]
    for u in nbrs[start]:
        free_deg[u] -= 1
    work = 0
    stack = [iter(sorted(nbrs[start], key=lambda u: (free_deg[u], u)))]
    while stack:
        work += 1
        if work > budget:
            return None
        v = path[-1]
        if len(path) == n and g.has_edge(v, start):
            return list(path)
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            last = path.pop()
            on_path[last] = False
            for u in nbrs[last]:
                free_deg[u] += 1
            continue
        if on_path[nxt]:
            continue
        path.append(nxt)
        on_path[nxt] = True
        for u in nbrs[nxt]:
            free_deg[u] -= 1
        # every unvisited vertex needs two neighbours among unvisited vertices and the path ends
        touched = set(nbrs[nxt]) | set(nbrs[v])
        if any(
            not on_path[u] and free_deg[u] + g.has_edge(u, nxt) + g.has_edge(u, start) < 2
            for u in touched
        ):
            path.pop()
            on_path[nxt] = False
            for u in nbrs[nxt]:
                free_deg[u] += 1
            continue
        stack.append(iter(sorted((u for u in nbrs[nxt] if not on_path[u]), key=lambda u: (free_deg[u], u))))
    return False


def _ilp_cycle(g: Graph, max_rounds: int = 500) -> list[int] | None | bool:
    """2-factor ILP with lazily added subtour cuts (HiGHS via scipy)."""
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import lil_matrix

    edges = g.edges()
    m, n = len(edges), g.n
    inc = lil_matrix((n, m))
    for j, (u, v) in enumerate(edges):
        inc[u, j] = 1
        inc[v, j] = 1
    cons = [LinearConstraint(inc.tocsr(), 2, 2)]
    cut_rows: list[np.ndarray] = []
    for _ in range(max_rounds):
        all_cons = list(cons)
        if cut_rows:
            all_cons.append(LinearConstraint(np.array(cut_rows), 2, np.inf))
        res = milp(np.zeros(m), constraints=all_cons, integrality=np.ones(m), bounds=Bounds(0, 1))
        if res.status == 2:
            return False
        if res.status != 0:
            return None
        chosen = [edges[j] for j in range(m) if res.x[j] > 0.5]
        comps = _components(n, chosen)
        if len(comps) == 1:
            return _cycle_order(n, chosen, comps[0])
        for comp in comps:
            s = set(comp)
            cut_rows.append(np.array([1.0 if (u in s) != (v in s) else 0.0 for u, v in edges]))
    return None


def is_hamiltonian(g: Graph, dfs_budget: int = 50_000, use_ilp: bool = True) -> HamiltonResult:
    n = g.n
    if n < 3:
        return HamiltonResult(False, None, "trivial", True)
    if n <= EXACT_MAX_N:
        cyc = TwoFactorSolver(g).hamilton_cycle()
        return HamiltonResult(cyc is not None, cyc, "subset-dp", True)
    if g.min_degree() < 2:
        return HamiltonResult(False, None, "min-degree", True)
    if not g.is_connected():
        return HamiltonResult(False, None, "disconnected", True)
    import networkx as nx

    from .corpus import to_nx

    if any(True for _ in nx.articulation_points(to_nx(g))):
        return HamiltonResult(False, None, "cut-vertex", True)
    from .diagnostics import beta_k_heuristic

    if beta_k_heuristic(g, 2, effort=2).value > 0:
        return HamiltonResult(False, None, "unbalanced", True)
    from .matching import max_k_matching

    if max_k_matching(g, 2).size < n:
        return HamiltonResult(False, None, "no-2-factor", True)
    found = _dfs_cycle(g, dfs_budget)
    if isinstance(found, list):
        return HamiltonResult(True, found, "dfs", True)
    if found is False:
        return HamiltonResult(False, None, "dfs-exhausted", True)
    if not use_ilp:
        return HamiltonResult(None, None, "dfs-budget", False)
    found = _ilp_cycle(g)
    if isinstance(found, list):
        return HamiltonResult(True, found, "ilp", True)
    if found is False:
        return HamiltonResult(False, None, "ilp", True)
    return HamiltonResult(None, None, "ilp-undecided", False)


# -- 2-factors --------------------------------------------------------------------------


def enumerate_two_factors(g: Graph, limit: int | None = None) -> Iterator[TwoFactor]:
    """Every 2-factor once. Vertices are settled in index order, each choosing
    the edges to later vertices it still needs."""
    n = g.n
    later = [[u for u in sorted(g.neighbors(v)) if u > v] for v in range(n)]
    deg = [0] * n
    chosen: list[Edge] = []
    count = 0

    def rec(v: int) -> Iterator[TwoFactor]:
        nonlocal count
        if v == n:
            count += 1
            yield TwoFactor(n, frozenset(chosen))
            return
        need = 2 - deg[v]
        if need < 0:
            return
        opts = [u for u in later[v] if deg[u] < 2]
        from itertools import combinations

        for pick in combinations(opts, need):
            for u in pick:
                deg[u] += 1
                chosen.append((v, u))
            deg[v] += need
            yield from rec(v + 1)
            deg[v] -= need
            for u in pick:
                deg[u] -= 1
                chosen.pop()
            if limit is not None and count >= limit:
                return

    if n == 0:
        return
    for tf in rec(0):
        yield tf
        if limit is not None and count >= limit:
            return


def improve_two_factor(g: Graph, tf: TwoFactor) -> TwoFactor:
    """Merge cycles by edge swaps: uv between cycles, uu', vv' in F, u'v' in G - F."""
    f = set(tf.edges)
    n = g.n
    while True:
        comp_of = {}
        for i, comp in enumerate(_components(n, f)):
            for v in comp:
                comp_of[v] = i
        nf = [[] for _ in range(n)]
        for a, b in f:
            nf[a].append(b)
            nf[b].append(a)
        merged = False
        for u, v in g.edges():
            if comp_of[u] == comp_of[v] or (u, v) in f:
                continue
            for u2 in nf[u]:
                for v2 in nf[v]:
                    if g.has_edge(u2, v2) and norm_edge(u2, v2) not in f:
                        f -= {norm_edge(u, u2), norm_edge(v, v2)}
                        f |= {(u, v), norm_edge(u2, v2)}
                        merged = True
                        break
                if merged:
                    break
            if merged:
                break
        if not merged:
            return TwoFactor(n, frozenset(f))


@dataclass
class Kappa2Result:
    kappa2: int
    factor: TwoFactor
    exact: bool


def two_factor_min_components(g: Graph) -> Kappa2Result | None:
    """None without a 2-factor; exact minimum for n <= 20, otherwise an upper bound."""
    from .matching import max_k_matching

    fm = max_k_matching(g, 2)
    if fm.size < g.n or g.n < 3:
        return None
    if g.n <= EXACT_MAX_N:
        res = TwoFactorSolver(g).kappa2()
        assert res is not None
        return Kappa2Result(res[0], res[1], True)
    tf = improve_two_factor(g, TwoFactor(g.n, frozenset(fm.edges)))
    return Kappa2Result(tf.kappa, tf, tf.kappa == 1)


# -- merge-walk sets --------------------------------------------------------------------


@dataclass
class MergeSets:
    w: int
    B_dd: set[int]
    B_du: set[int]
    T_w: set[int]
    Z_w: set[int]
    factor: TwoFactor | None = None
    e_T: int = 0
    density_ok: bool | None = None
    overlap_ok: bool | None = None

    @property
    def in_W(self) -> bool:
        return bool(self.Z_w)


def _walk_sets(g: Graph, tf: TwoFactor, w: int, k2: int, budget: int) -> tuple[set[int], set[int]]:
    idx = EdgeIndex(g)
    fmask = idx.mask(tf.edges)
    kcache: dict[int, int] = {}
    dd: set[int] = set()
    du: set[int] = set()
    for (v, arrow, pmask), _ in walk_states(idx, fmask, w, DOWN, budget):
        target = dd if arrow == DOWN else du
        if v in target or (arrow == DOWN and v == w):
            continue
        hm = fmask ^ pmask
        kv = kcache.get(hm)
        if kv is None:
            kv = mask_kappa(g.n, idx.edges, hm)
            kcache[hm] = kv
        if kv < k2:
            target.add(v)
    return dd, du


def merge_walk_sets(g: Graph, tf: TwoFactor, w: int, solver: TwoFactorSolver | None = None,
                    budget: int | None = 500_000) -> MergeSets:
    """Down-down and down-up walk sets from w relative to the 2-factor ``tf``.

    A closed down-down walk at w is not counted: it leaves w isolated and
    does not correspond to an added edge.
    """
    if not tf.is_subgraph_of(g):
        raise ValueError("2-factor must lie in G")
    if solver is None:
        solver = TwoFactorSolver(g)
    res = solver.kappa2()
    if res is None:
        raise ValueError("graph has no 2-factor")
    k2 = res[0]
    if k2 <= 1:
        raise ValueError("graph is Hamiltonian; merge sets need kappa2 > 1")
    dd, du = _walk_sets(g, tf, w, k2, budget)
    Z = solver.Z(w, k2)
    T = dd | du
    out = MergeSets(w, dd, du, T, Z, factor=tf)
    if dd:
        from .graph import cut_stats

        out.e_T = cut_stats(g, T)[0]
        out.density_ok = 6 * out.e_T >= 7 * len(T)
        out.overlap_ok = 3 * len(T & Z) >= len(T)
    return out


def _alternating_trails(f1: set[Edge], f2: set[Edge]) -> list[set[Edge]]:
    """Split f1 xor f2 (two 2-regular edge sets) into closed alternating trails."""
    only1, only2 = f1 - f2, f2 - f1
    inc: dict[int, list[list[Edge]]] = {}
    for side, es in ((0, only1), (1, only2)):
        for e in sorted(es):
            for x in e:
                inc.setdefault(x, [[], []])[side].append(e)
    used: set[Edge] = set()
    out = []
    for e0 in sorted(only1):
        if e0 in used:
            continue
        trail = set()
        cur_e, at, side = e0, e0[1], 0
        while cur_e not in used:
            used.add(cur_e)
            trail.add(cur_e)
            side = 1 - side
            nxt = [e for e in inc[at][side] if e not in used]
            if not nxt:
                break
            cur_e = nxt[0]
            at = cur_e[0] if cur_e[1] == at else cur_e[1]
        out.append(trail)
    return out


def merge_sets_for_vertex(g: Graph, w: int, solver: TwoFactorSolver | None = None,
                          budget: int | None = 500_000) -> MergeSets:
    """Pick a 2-factor with nonempty down-down set for w via the swap construction."""
    if solver is None:
        solver = TwoFactorSolver(g)
    res = solver.kappa2()
    if res is None:
        raise ValueError("graph has no 2-factor")
    k2, base = res
    if k2 <= 1:
        raise ValueError("graph is Hamiltonian; merge sets need kappa2 > 1")
    Z = solver.Z(w, k2)
    if not Z:
        return MergeSets(w, set(), set(), set(), set(), factor=base)
    z = min(Z)
    fprime = solver.two_factor_with_edge(w, z)
    assert fprime is not None
    wz = norm_edge(w, z)
    trails = _alternating_trails(set(base.edges), set(fprime.edges))
    others = set().union(*(t for t in trails if wz not in t)) if trails else set()
    f = TwoFactor(g.n, frozenset(set(base.edges) ^ others))
    return merge_walk_sets(g, f, w, solver, budget)


# -- target set and pipeline -------------------------------------------------------------


@dataclass
class Progress:
    lambda2: int
    kappa: int
    kappa2: int | None
    kappa2_exact: bool
    phase: str  # lambda2 | connectivity | kappa2 | hamiltonian


def progress(g: Graph) -> Progress:
    from .matching import lambda_k

    lam2 = lambda_k(g, 2)
    comps = len(g.components())
    if lam2 > 0 or g.n < 3:
        return Progress(lam2, comps, None, True, "lambda2")
    if comps > 1:
        return Progress(lam2, comps, None, True, "connectivity")
    k2 = two_factor_min_components(g)
    if k2 is None:
        return Progress(lam2, comps, None, True, "lambda2")
    if k2.kappa2 == 1:
        return Progress(lam2, comps, 1, True, "hamiltonian")
    if not k2.exact and is_hamiltonian(g).hamiltonian:
        return Progress(lam2, comps, 1, True, "hamiltonian")
    return Progress(lam2, comps, k2.kappa2, k2.exact, "kappa2")


def _objective(p: Progress) -> tuple[int, int]:
    if p.phase == "lambda2":
        return (p.lambda2, 0)
    if p.phase == "connectivity":
        return (p.kappa, 0)
    return (p.kappa2 or 0, 0)


def is_target(g: Graph, e: Edge, before: Progress | None = None) -> bool:
    """Whether adding e strictly improves the objective of the current phase."""
    if before is None:
        before = progress(g)
    if before.phase == "hamiltonian":
        return False
    h = g.add_edge(*e)
    after = progress(h)
    if before.phase == "lambda2":
        return after.lambda2 < before.lambda2
    if before.phase == "connectivity":
        return after.kappa < before.kappa
    return after.phase == "hamiltonian" or (after.kappa2 is not None and after.kappa2 < before.kappa2)


@dataclass
class TargetSet:
    edges: set[Edge]
    case: str  # lambda2 | disconnected | kappa2 | hamiltonian


def target_set_c(g: Graph) -> TargetSet:
    p = progress(g)
    if p.phase == "hamiltonian":
        return TargetSet(set(), "hamiltonian")
    if p.phase == "connectivity":
        comp = {}
        for i, c in enumerate(g.components()):
            for v in c:
                comp[v] = i
        return TargetSet({e for e in g.non_edges() if comp[e[0]] != comp[e[1]]}, "disconnected")
    if p.phase == "kappa2" and p.kappa2_exact and g.n <= EXACT_MAX_N:
        solver = TwoFactorSolver(g)
        edges = {e for e in g.non_edges() if solver.kappa2_with_edge(*e) < p.kappa2}
        return TargetSet(edges, "kappa2")
    case = "lambda2" if p.phase == "lambda2" else "kappa2"
    return TargetSet({e for e in g.non_edges() if is_target(g, e, p)}, case)


@dataclass
class TargetDensity:
    size: int
    bound: float  # gamma^2 n^2 / 32
    case: str
    sparse: bool
    sparse_mode: str
    min_degree_ok: bool

    @property
    def hypotheses_met(self) -> bool:
        return self.sparse and self.min_degree_ok and self.case != "hamiltonian"

    @property
    def holds(self) -> bool:
        """Hamiltonian, or many targets, or not sparse: the asymptotic trichotomy at this n."""
        return self.case == "hamiltonian" or self.size >= self.bound or not self.sparse


def target_density_check(g: Graph, gamma: float) -> TargetDensity:
    """Size of the Hamiltonicity target set against gamma^2 n^2 / 32.

    The lower bound is only promised for large n, so callers should log the
    result rather than assert it at desk scale.
    """
    if not 0 < gamma < 0.5:
        raise ValueError("gamma must lie in (0, 1/2)")
    from .diagnostics import sparsity_check

    ts = target_set_c(g)
    sp = sparsity_check(g, gamma=gamma)
    return TargetDensity(len(ts.edges), gamma * gamma * g.n * g.n / 32, ts.case, sp.ok, sp.mode,
                         g.min_degree() >= 4)


@dataclass
class TraceRow:
    step: int
    u: int
    v: int
    was_target: bool
    lambda2: int
    kappa: int
    kappa2_bound: int | None
    phase: str


@dataclass
class SprinkleTrace:
    rows: list[TraceRow] = field(default_factory=list)
    stopped_at: int = 0
    hamiltonian: bool = False

    @property
    def hits(self) -> list[int]:
        return [int(r.was_target) for r in self.rows]

    def phase_changes(self) -> list[tuple[int, str]]:
        out, last = [], None
        for r in self.rows:
            if r.phase != last:
                out.append((r.step, r.phase))
                last = r.phase
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "u", "v", "was_target", "lambda2", "kappa", "kappa2_bound", "phase"])
            for r in self.rows:
                w.writerow([r.step, r.u, r.v, int(r.was_target), r.lambda2, r.kappa,
                            "" if r.kappa2_bound is None else r.kappa2_bound, r.phase])


def augment_pipeline(g: Graph, stream: Iterable[Edge], budget: int) -> tuple[Graph, SprinkleTrace]:
    """Add stream edges until Hamiltonian or the budget runs out, recording target hits.

    Each row holds the state before the edge is added, so ``was_target``
    refers to the target set of that state.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    trace = SprinkleTrace()
    cur = g
    p = progress(cur)
    it = iter(stream)
    step = 0
    while p.phase != "hamiltonian" and step < budget:
        e = next(it, None)
        if e is None:
            break
        e = norm_edge(*e)
        if cur.has_edge(*e):
            raise ValueError(f"stream edge {e} already present")
        step += 1
        nxt = cur.add_edge(*e)
        q = progress(nxt)
        if p.phase == "lambda2":
            hit = q.lambda2 < p.lambda2
        elif p.phase == "connectivity":
            hit = q.kappa < p.kappa
        else:
            hit = q.phase == "hamiltonian" or (q.kappa2 is not None and q.kappa2 < p.kappa2)
        trace.rows.append(TraceRow(step, e[0], e[1], hit, p.lambda2, p.kappa, p.kappa2, p.phase))
        cur, p = nxt, q
    trace.stopped_at = step
    trace.hamiltonian = p.phase == "hamiltonian"
    return cur, trace

