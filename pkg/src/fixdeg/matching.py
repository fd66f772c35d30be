"""k-matchings, deficiency, alternating reach sets and their certificates."""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .graph import Edge, Graph, cut_stats, norm_edge, shortest_cycle_through_edge
from .walks import DOWN, UP, EdgeIndex, SearchBudgetExceeded, parse_walk_type


@dataclass(frozen=True)
class KMatching:
    k: int
    n: int
    edges: frozenset[Edge]

    @property
    def size(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    @property
    def deficiency(self) -> int:
        """floor(kn/2) - |F|."""
        return self.k * self.n // 2 - len(self.edges)

    def deficient(self) -> list[int]:
        return [v for v, d in enumerate(self.degrees()) if d < self.k]

    def is_valid(self, g: Graph) -> bool:
        return all(g.has_edge(u, v) for u, v in self.edges) and all(d <= self.k for d in self.degrees())


# -- maximum b-matching by alternating-walk augmentation ----------------------------


@dataclass
class MatchingStats:
    augmentations: int = 0
    exact_searches: int = 0
    milp_fallback: bool = False
    walks: list[list[int]] = field(default_factory=list)


def _greedy(g: Graph, caps: Sequence[int]) -> set[Edge]:
    deg = [0] * g.n
    f: set[Edge] = set()
    for u, v in g.edges():
        if deg[u] < caps[u] and deg[v] < caps[v]:
            f.add((u, v))
            deg[u] += 1
            deg[v] += 1
    return f


def _relaxed_walk(g: Graph, f: set[Edge], deg: list[int], caps: Sequence[int], s: int) -> list[int] | None:
    """Shortest walk from ``s`` alternating w.r.t. the fixed set F, ending deficient.

    Edge repeats are not tracked here, so a result must be validated; but if
    no such walk exists then no augmenting walk from ``s`` exists either.
    """
    # state (v, arrow); arrow DOWN at the start means the next edge is outside F
    parent: dict[tuple[int, int], tuple[int, int] | None] = {(s, DOWN): None}
    queue = deque([(s, DOWN)])
    while queue:
        v, arrow = queue.popleft()
        want_in = arrow == UP
        for u in g.sorted_neighbors(v):
            in_f = norm_edge(v, u) in f
            if in_f != want_in:
                continue
            nxt = (u, DOWN if in_f else UP)
            if nxt in parent:
                continue
            parent[nxt] = (v, arrow)
            if not in_f and caps[u] - deg[u] >= (2 if u == s else 1):
                walk = [u]
                cur = (v, arrow)
                while cur is not None:
                    walk.append(cur[0])
                    cur = parent[cur]
                return walk[::-1]
            queue.append(nxt)
    return None


def _apply_walk(f: set[Edge], walk: list[int]) -> set[Edge]:
    out = set(f)
    for a, b in zip(walk, walk[1:]):
        out ^= {norm_edge(a, b)}
    return out


def _valid_augment(g: Graph, f: set[Edge], caps: Sequence[int], walk: list[int]) -> set[Edge] | None:
    from .walks import is_alternating_walk

    t = is_alternating_walk(g, f, walk)
    if t != (UP, UP):
        return None
    h = _apply_walk(f, walk)
    if len(h) != len(f) + 1:
        return None
    deg = [0] * g.n
    for u, v in h:
        deg[u] += 1
        deg[v] += 1
    if any(deg[v] > caps[v] for v in range(g.n)):
        return None
    return h


def _exact_walk(g: Graph, f: set[Edge], deg: list[int], caps: Sequence[int], s: int, budget: int) -> list[int] | None:
    """Shortest augmenting walk from ``s`` over full parity states."""
    idx = EdgeIndex(g)
    fmask = idx.mask(f)
    parent: dict = {}
    # re-run the state search keeping parents so the walk can be rebuilt
    start_states = []
    for u, j in idx.incident[s]:
        if (fmask >> j) & 1:
            continue
        start_states.append((u, UP, 1 << j))
    queue = deque()
    for st in start_states:
        if st not in parent:
            parent[st] = None
            queue.append(st)
    while queue:
        st = queue.popleft()
        v, arrow, pmask = st
        if arrow == UP and caps[v] - deg[v] >= (2 if v == s else 1):
            walk = [v]
            cur = parent[st]
            while cur is not None:
                walk.append(cur[0])
                cur = parent[cur]
            walk.append(s)
            return walk[::-1]
        cur_set = fmask ^ pmask
        want = 0 if arrow == DOWN else 1
        for u, j in idx.incident[v]:
            in_cur = (cur_set >> j) & 1
            if in_cur != want:
                continue
            nxt = (u, DOWN if in_cur else UP, pmask ^ (1 << j))
            if nxt in parent:
                continue
            if len(parent) >= budget:
                raise SearchBudgetExceeded
            parent[nxt] = st
            queue.append(nxt)
    return None


def _milp_b_matching(g: Graph, caps: Sequence[int]) -> set[Edge]:
    import numpy as np
    from scipy.optimize import LinearConstraint, milp
    from scipy.sparse import lil_matrix

    edges = g.edges()
    if not edges:
        return set()
    a = lil_matrix((g.n, len(edges)))
    for j, (u, v) in enumerate(edges):
        a[u, j] = 1
        a[v, j] = 1
    res = milp(
        c=-np.ones(len(edges)),
        constraints=LinearConstraint(a.tocsr(), -np.inf, np.asarray(caps, float)),
        integrality=np.ones(len(edges)),
        bounds=(0, 1),
    )
    if not res.success:
        raise RuntimeError(f"milp failed: {res.message}")
    return {e for e, x in zip(edges, res.x) if x > 0.5}


def max_b_matching(
    g: Graph,
    caps: Sequence[int],
    start: Iterable[Edge] | None = None,
    stats: MatchingStats | None = None,
    exact_budget: int = 100_000,
) -> set[Edge]:
    """Maximum subgraph with d(v) <= caps[v], grown by augmenting alternating walks."""
    caps = [max(0, int(c)) for c in caps]
    if start is None:
        f = _greedy(g, caps)
    else:
        f = {norm_edge(u, v) for u, v in start}
    deg = [0] * g.n
    for u, v in f:
        deg[u] += 1
        deg[v] += 1
    if any(deg[v] > caps[v] for v in range(g.n)):
        raise ValueError("start set violates capacities")
    while True:
        improved = False
        for s in range(g.n):
            if deg[s] >= caps[s]:
                continue
            walk = _relaxed_walk(g, f, deg, caps, s)
            if walk is None:
                continue
            h = _valid_augment(g, f, caps, walk)
            if h is None:
                if stats is not None:
                    stats.exact_searches += 1
                try:
                    walk = _exact_walk(g, f, deg, caps, s, exact_budget)
                except SearchBudgetExceeded:
                    if stats is not None:
                        stats.milp_fallback = True
                    return _milp_b_matching(g, caps)
                if walk is None:
                    continue
                h = _valid_augment(g, f, caps, walk)
                assert h is not None, "exact search returned an invalid walk"
            f = h
            deg[walk[0]] += 1
            deg[walk[-1]] += 1
            if stats is not None:
                stats.augmentations += 1
                stats.walks.append(walk)
            improved = True
            break
        if not improved:
            return f


def max_k_matching(g: Graph, k: int, stats: MatchingStats | None = None) -> KMatching:
    if k < 1:
        raise ValueError("k must be at least 1")
    return KMatching(k, g.n, frozenset(max_b_matching(g, [k] * g.n, stats=stats)))


def max_matching_size(g: Graph, caps: Sequence[int]) -> int:
    return len(max_b_matching(g, caps))


def lambda_k(g: Graph, k: int) -> int:
    """floor(kn/2) minus the size of a maximum k-matching."""
    return max_k_matching(g, k).deficiency


def total_deficiency(g: Graph, k: int) -> int:
    """kn - 2|F| for a maximum k-matching F, i.e. the sum of k - d_F(v)."""
    return k * g.n - 2 * max_k_matching(g, k).size


# -- f-factors and alternating reach ------------------------------------------------


def has_f_factor(g: Graph, f: Sequence[int], hint: Iterable[Edge] = ()) -> bool:
    """Whether some spanning subgraph has degree exactly f(v) at every v."""
    if any(x < 0 for x in f) or sum(f) % 2:
        return False
    if any(f[v] > g.degree(v) for v in range(g.n)):
        return False
    deg = [0] * g.n
    start = set()
    for u, v in hint:
        e = norm_edge(u, v)
        if deg[u] < f[u] and deg[v] < f[v]:
            start.add(e)
            deg[u] += 1
            deg[v] += 1
    return 2 * len(max_b_matching(g, f, start=start)) == sum(f)


_SIGN = {UP: 1, DOWN: -1}


def alternating_reach(g: Graph, fm: KMatching | Iterable[Edge], u: int, walk_type) -> set[int]:
    """Vertices v reachable from u by an F-alternating walk of the given type.

    A walk of type (s, t) from u to v exists exactly when some subgraph has
    degrees d_F + s*[u] + t*[v] (up = +1, down = -1): the walk's parity set
    shifts degrees that way, and conversely the symmetric difference with such
    a subgraph splits into alternating trails, one of which runs from u to v.
    For u = v with mixed types the degree condition is vacuous; there the
    empty walk (up-down) or the out-and-back walk along an F edge (down-up)
    decides.
    """
    first, last = parse_walk_type(walk_type)
    f = set(fm.edges) if isinstance(fm, KMatching) else {norm_edge(a, b) for a, b in fm}
    d_f = [0] * g.n
    for a, b in f:
        d_f[a] += 1
        d_f[b] += 1
    out: set[int] = set()
    for v in range(g.n):
        if v == u and first != last:
            # the empty walk, or out and back along one F edge: (u, a, u)
            if first == UP or d_f[u] >= 1:
                out.add(v)
            continue
        target = list(d_f)
        target[u] += _SIGN[first]
        target[v] += _SIGN[last]
        if has_f_factor(g, target, f):
            out.add(v)
    return out


# -- deficiency sets, targets ---------------------------------------------------------


@dataclass
class DeficiencySets:
    X: set[int]
    Y: dict[int, set[int]]
    exact: bool


def deficiency_sets(g: Graph, k: int, exact_threshold: tuple[int, int] = (12, 24), force_exact: bool = False) -> DeficiencySets:
    """X: vertices deficient in some maximum k-matching; Y_x: partners deficient together with x.

    The exact route caps the relevant vertices at k - 1 and checks that the
    maximum size does not drop. Beyond the threshold the sets are inner
    approximations built from one maximum matching and its alternating reach.
    """
    fm = max_k_matching(g, k)
    if fm.deficiency <= 0:
        raise ValueError("graph has a k-factor")
    best = fm.size
    exact = force_exact or (g.n <= exact_threshold[0] and g.m <= exact_threshold[1])
    if exact:
        X = set()
        for x in range(g.n):
            caps = [k] * g.n
            caps[x] = k - 1
            if len(max_b_matching(g, caps)) == best:
                X.add(x)
        Y: dict[int, set[int]] = {}
        for x in sorted(X):
            ys = set()
            for y in sorted(X):
                if y == x:
                    continue
                caps = [k] * g.n
                caps[x] = k - 1
                caps[y] = k - 1
                if len(max_b_matching(g, caps)) == best:
                    ys.add(y)
            Y[x] = ys
        return DeficiencySets(X, Y, True)
    xf = fm.deficient()
    deg = fm.degrees()
    reach = {y: alternating_reach(g, fm, y, "ud") for y in xf}
    X = set().union(*reach.values())
    Y: dict[int, set[int]] = {}
    for x in xf:
        ys: set[int] = set()
        for y in xf:
            if y != x or k - deg[x] >= 2:
                ys |= reach[y]
        ys.discard(x)
        Y[x] = ys
    for x in X - set(xf):
        Y[x] = set()
    return DeficiencySets(X, Y, False)


def target_set_k(g: Graph, k: int) -> list[Edge]:
    """Non-edges whose addition lowers the deficiency, by recomputation."""
    base = lambda_k(g, k)
    if base == 0:
        return []
    return [(u, v) for u, v in g.non_edges() if lambda_k(g.add_edge(u, v), k) < base]


# -- the Posa-type set ----------------------------------------------------------------


@dataclass
class PosaResult:
    S: set[int]
    y: int
    x: int
    matching: KMatching
    e_S: int
    meets_density: bool  # e(S) >= 13/12 |S|
    Y_x: set[int] | None = None
    meets_overlap: bool | None = None  # |S & Y_x| >= |S|/(k+1) - 1
    preprocessed: bool = False


def posa_set_S(g: Graph, k: int, fm: KMatching | None = None, x: int | None = None, y: int | None = None,
               Y_x: set[int] | None = None) -> PosaResult:
    """The union of up-up and up-down reach sets from a second deficient vertex y."""
    if g.min_degree() < k + 1:
        raise ValueError(f"minimum degree {g.min_degree()} below k+1={k + 1}")
    if fm is None:
        fm = max_k_matching(g, k)
    if fm.k != k or not fm.is_valid(g):
        raise ValueError("invalid k-matching")
    best = max_k_matching(g, k).size
    if fm.size != best:
        raise ValueError("matching is not maximum")
    if fm.deficiency <= 0:
        raise ValueError("graph has a k-factor")
    xf = fm.deficient()
    if x is None:
        x = xf[0]
    if x not in xf:
        raise ValueError(f"vertex {x} is not deficient in the matching")
    f = set(fm.edges)
    pre = False
    if len(xf) == 1:
        # shift deficiency along x - x' - x'' (xx' outside F, x'x'' in F)
        done = False
        for x1 in g.sorted_neighbors(x):
            if norm_edge(x, x1) in f:
                continue
            for x2 in g.sorted_neighbors(x1):
                if x2 != x and norm_edge(x1, x2) in f:
                    f ^= {norm_edge(x, x1), norm_edge(x1, x2)}
                    done = True
                    break
            if done:
                break
        if not done:
            raise ValueError("no shifting walk found")
        fm = KMatching(k, g.n, frozenset(f))
        xf = fm.deficient()
        pre = True
    if y is None:
        y = min(v for v in xf if v != x)
    elif y == x or y not in xf:
        raise ValueError("y must be another deficient vertex")
    S = alternating_reach(g, fm, y, "uu") | alternating_reach(g, fm, y, "ud")
    e_s = cut_stats(g, S)[0]
    res = PosaResult(S, y, x, fm, e_s, 12 * e_s >= 13 * len(S), preprocessed=pre)
    if Y_x is not None:
        res.Y_x = set(Y_x)
        res.meets_overlap = (k + 1) * (len(S & Y_x) + 1) >= len(S)
    return res


# -- layered certificate -------------------------------------------------------------


@dataclass
class LayerPartition:
    layers: list[set[int]]
    r: int
    A: set[int]
    B: set[int]
    C: set[int]


@dataclass
class CertificateReport:
    partition: LayerPartition
    beta: int
    lam: int
    total_deficiency: int
    c_4r1: int
    cross_edges: int
    chain_slack: int  # beta - (sum of deficits - 3 c - cross)
    epsilon: float
    psi: int
    mu: float
    window_hypothesis: str
    claims: dict[str, bool]

    def to_json(self) -> dict:
        p = self.partition
        return {
            "layers": [sorted(x) for x in p.layers],
            "r": p.r,
            "A": sorted(p.A),
            "B": sorted(p.B),
            "beta": self.beta,
            "lambda": self.lam,
            "total_deficiency": self.total_deficiency,
            "c_4r1": self.c_4r1,
            "cross_edges": self.cross_edges,
            "chain_slack": self.chain_slack,
            "epsilon": self.epsilon,
            "psi": self.psi,
            "mu": self.mu,
            "window_hypothesis": self.window_hypothesis,
            "claims_verified": self.claims,
        }


def build_layers(g: Graph, f: set[Edge], x0: Iterable[int]) -> list[set[int]]:
    """X_0 = deficient vertices; odd layers via non-F edges, even layers via F edges."""
    layers = [set(x0)]
    used = set(layers[0])
    while True:
        prev = layers[-1]
        odd = len(layers) % 2 == 1
        nxt = set()
        for u in prev:
            for v in g.neighbors(u):
                if v in used:
                    continue
                in_f = norm_edge(u, v) in f
                if (odd and not in_f) or (not odd and in_f):
                    nxt.add(v)
        if not nxt:
            return layers
        layers.append(nxt)
        used |= nxt


def certificate_partition(g: Graph, k: int, fm: KMatching | None = None) -> CertificateReport:
    from .diagnostics import effective_girth

    if fm is None:
        fm = max_k_matching(g, k)
    if fm.deficiency <= 0 and k * g.n - 2 * fm.size <= 0:
        raise ValueError("graph has a k-factor")
    f = set(fm.edges)
    layers = build_layers(g, f, fm.deficient())

    def layer(i: int) -> set[int]:
        return layers[i] if i < len(layers) else set()

    def a_set(r: int) -> set[int]:
        return set().union(*(layer(2 * j) for j in range(r + 1)))

    def b_set(r: int) -> set[int]:
        return set().union(*(layer(2 * j - 1) for j in range(1, r + 1)))

    girth = effective_girth(g)
    psi = girth.psi
    mu = g.m / g.n
    eps = 1 / (4 * mu * math.sqrt(psi)) if mu > 0 else math.inf
    deg = g.degrees()

    def d_of(s: set[int]) -> int:
        return sum(deg[v] for v in s)

    r = 1
    while d_of(a_set(r)) > d_of(a_set(r - 1)) and not d_of(a_set(r)) <= (1 + eps) * d_of(a_set(r - 1)):
        r += 1
    A, B = a_set(r), b_set(r)
    C = set(range(g.n)) - A - B
    part = LayerPartition([layer(i) for i in range(2 * r + 1)], r, A, B, C)
    _, e_ab, d_a = cut_stats(g, A, B)
    beta = e_ab + k * (len(A) - len(B)) - d_a
    c_short = girth.c_count(4 * r + 1)
    cross = cut_stats(g, layer(2 * r), layer(2 * r + 1))[1]
    tot = k * g.n - 2 * fm.size
    slack = beta - (tot - 3 * c_short - cross)

    # Claims
    claim1 = all(
        norm_edge(u, v) in f or shortest_cycle_through_edge(g, u, v) <= 4 * r + 1
        for u, v in g.edges()
        if u in A and v in A
    )
    ab_next = A | b_set(r + 1)
    claim2 = True
    for v in A:
        nb = g.neighbors(v)
        if sum(1 for w in nb if w in ab_next) < deg[v] - k + 1:
            claim2 = False
        if any(w not in ab_next and norm_edge(v, w) not in f for w in nb):
            claim2 = False
    claim3 = all(
        w in A or shortest_cycle_through_edge(g, v, w) <= 4 * r - 1
        for v in B
        for w in g.neighbors(v)
        if norm_edge(v, w) in f
    )
    hyp = "met" if 4 * r + 1 <= psi else "window hypothesis unmet"
    return CertificateReport(
        part, beta, fm.deficiency, tot, c_short, cross, slack, eps, psi, mu, hyp,
        {"claim1": claim1, "claim2": claim2, "claim3": claim3, "chain": slack >= 0},
    )
