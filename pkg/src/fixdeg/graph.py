"""Simple and multigraph containers, vertex-set functionals, and edge-list I/O.

Vertices are dense integers ``0..n-1``.  Vertex sets are passed around as
Python ``int`` bitmasks (bit ``v`` set means ``v`` is a member); any iterable of
vertices is accepted wherever a set is expected and converted with
:func:`as_mask`.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Iterator
from pathlib import Path

Edge = tuple[int, int]


def norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def as_mask(vertices: int | Iterable[int]) -> int:
    if isinstance(vertices, int):
        return vertices
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def members(mask: int) -> list[int]:
    """Vertices in a bitmask, ascending."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


class Graph:
    """Immutable simple undirected graph.

    ``add_edge``/``remove_edge`` return new graphs; the receiver never changes.
    """

    __slots__ = ("n", "m", "_adj", "_masks", "labels")

    def __init__(self, n: int, edges: Iterable[Edge] = (), labels: tuple[int, ...] | None = None):
        if n < 0:
            raise ValueError("negative vertex count")
        adj: list[set[int]] = [set() for _ in range(n)]
        m = 0
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if v in adj[u]:
                raise ValueError(f"duplicate edge ({u}, {v})")
            adj[u].add(v)
            adj[v].add(u)
            m += 1
        self.n = n
        self.m = m
        self._adj: tuple[frozenset[int], ...] = tuple(frozenset(a) for a in adj)
        self._masks: list[int] | None = None
        self.labels = labels

    @classmethod
    def _from_adj(cls, adj: tuple[frozenset[int], ...], m: int, labels=None) -> Graph:
        g = cls.__new__(cls)
        g.n = len(adj)
        g.m = m
        g._adj = adj
        g._masks = None
        g.labels = labels
        return g

    # -- queries -----------------------------------------------------------

    def neighbors(self, v: int) -> frozenset[int]:
        return self._adj[v]

    def sorted_neighbors(self, v: int) -> list[int]:
        return sorted(self._adj[v])

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def degrees(self) -> list[int]:
        return [len(a) for a in self._adj]

    def min_degree(self) -> int:
        return min((len(a) for a in self._adj), default=0)

    def max_degree(self) -> int:
        return max((len(a) for a in self._adj), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def edges(self) -> list[Edge]:
        return [(u, v) for u in range(self.n) for v in sorted(self._adj[u]) if u < v]

    def non_edges(self) -> list[Edge]:
        return [(u, v) for u in range(self.n) for v in range(u + 1, self.n) if v not in self._adj[u]]

    def adjacency_masks(self) -> list[int]:
        if self._masks is None:
            self._masks = [as_mask(a) for a in self._adj]
        return self._masks

    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges())

    # -- derived graphs ----------------------------------------------------

    def add_edge(self, u: int, v: int) -> Graph:
        if u == v:
            raise ValueError(f"self-loop at {u}")
        if v in self._adj[u]:
            raise ValueError(f"edge ({u}, {v}) already present")
        adj = list(self._adj)
        adj[u] = adj[u] | {v}
        adj[v] = adj[v] | {u}
        return Graph._from_adj(tuple(adj), self.m + 1, self.labels)

    def remove_edge(self, u: int, v: int) -> Graph:
        if v not in self._adj[u]:
            raise ValueError(f"edge ({u}, {v}) not present")
        adj = list(self._adj)
        adj[u] = adj[u] - {v}
        adj[v] = adj[v] - {u}
        return Graph._from_adj(tuple(adj), self.m - 1, self.labels)

    def add_edges(self, edges: Iterable[Edge]) -> Graph:
        g = self
        for u, v in edges:
            g = g.add_edge(u, v)
        return g

    def spanning_subgraph(self, edges: Iterable[Edge]) -> Graph:
        edges = list(edges)
        for u, v in edges:
            if v not in self._adj[u]:
                raise ValueError(f"({u}, {v}) is not an edge of the graph")
        return Graph(self.n, edges)

    def relabel(self, perm: list[int]) -> Graph:
        """Graph with vertex ``v`` renamed to ``perm[v]``."""
        return Graph(self.n, ((perm[u], perm[v]) for u, v in self.edges()))

    # -- structure ---------------------------------------------------------

    def components(self) -> list[list[int]]:
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp = [s]
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for w in self._adj[u]:
                    if not seen[w]:
                        seen[w] = True
                        comp.append(w)
                        queue.append(w)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self._adj == other._adj

    def __hash__(self) -> int:
        return hash((self.n, self._adj))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


class MultiGraph:
    """Outcome of a configuration-model pairing: parallel edges and loops allowed."""

    __slots__ = ("n", "edges")

    def __init__(self, n: int, edges: Iterable[Edge]):
        self.n = n
        self.edges = [norm_edge(u, v) for u, v in edges]

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1  # a loop lands on the same vertex twice
        return deg

    def loops(self) -> int:
        return sum(1 for u, v in self.edges if u == v)

    def multi_edges(self) -> int:
        seen: set[Edge] = set()
        dup = 0
        for e in self.edges:
            if e[0] == e[1]:
                continue
            if e in seen:
                dup += 1
            seen.add(e)
        return dup

    def is_simple(self) -> bool:
        return self.loops() == 0 and self.multi_edges() == 0

    def to_graph(self) -> Graph:
        if not self.is_simple():
            raise ValueError("multigraph has loops or parallel edges")
        return Graph(self.n, self.edges)


def cut_stats(g: Graph, a: int | Iterable[int], b: int | Iterable[int] = 0) -> tuple[int, int, int]:
    """Return ``(e(A), e(A, B), d(A))`` for disjoint vertex sets ``A`` and ``B``."""
    am, bm = as_mask(a), as_mask(b)
    if am & bm:
        raise ValueError("A and B overlap")
    masks = g.adjacency_masks()
    inside = cross = deg = 0
    for v in members(am):
        nb = masks[v]
        inside += popcount(nb & am)
        cross += popcount(nb & bm)
        deg += g.degree(v)
    return inside // 2, cross, deg


def edges_within(g: Graph, s: int | Iterable[int]) -> int:
    return cut_stats(g, s)[0]


def shortest_cycle_through_edge(g: Graph, u: int, v: int, limit: int | None = None) -> float:
    """Length of the shortest cycle using edge ``uv`` (``inf`` if it is a bridge)."""
    dist = {u: 0}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        d = dist[x]
        if limit is not None and d + 1 >= limit:
            break
        for y in g.neighbors(x):
            if (x == u and y == v) or y in dist:
                continue
            dist[y] = d + 1
            if y == v:
                return d + 2
            queue.append(y)
    return float("inf")


# -- edge-list files -------------------------------------------------------


def parse_edgelist(lines: Iterable[str]) -> Graph:
    """Parse whitespace-separated integer pairs.

    Labels are remapped to dense indices in order of first appearance unless a
    ``# n=<count>`` header is present, in which case labels must already be
    ``0..count-1`` (this preserves isolated vertices on round trips).
    """
    declared_n = None
    raw: list[tuple[int, int, int]] = []
    for lineno, line in enumerate(lines, 1):
        text = line.strip()
        if not text:
            continue
        if text.startswith("#"):
            body = text[1:].strip()
            if body.startswith("n="):
                declared_n = int(body[2:])
            continue
        parts = text.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected two integers, got {text!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer label in {text!r}") from None
        if u == v:
            raise ValueError(f"line {lineno}: self-loop at {u}")
        raw.append((lineno, u, v))

    if declared_n is not None:
        index = {i: i for i in range(declared_n)}
        labels = None
    else:
        index = {}
        for _, u, v in raw:
            for x in (u, v):
                if x not in index:
                    index[x] = len(index)
        labels = tuple(index)
        if labels == tuple(range(len(labels))):
            labels = None
    n = len(index)
    seen: set[Edge] = set()
    edges = []
    for lineno, u, v in raw:
        if u not in index or v not in index:
            raise ValueError(f"line {lineno}: label outside declared range 0..{n - 1}")
        e = norm_edge(index[u], index[v])
        if e in seen:
            raise ValueError(f"line {lineno}: duplicate edge ({u}, {v})")
        seen.add(e)
        edges.append(e)
    return Graph(n, edges, labels=labels)


def read_edgelist(path: str | Path) -> Graph:
    with open(path) as fh:
        return parse_edgelist(fh)


def format_edgelist(g: Graph) -> str:
    lab = g.labels
    out = []
    if lab is None:
        out.append(f"# n={g.n}")
    for u, v in g.edges():
        if lab is not None:
            u, v = lab[u], lab[v]
        out.append(f"{u} {v}")
    return "\n".join(out) + "\n"


def write_edgelist(g: Graph, path: str | Path) -> None:
    Path(path).write_text(format_edgelist(g))


def iter_pairs(n: int) -> Iterator[Edge]:
    for u in range(n):
        for v in range(u + 1, n):
            yield (u, v)
