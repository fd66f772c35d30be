"""Alternating walks with repeated edges, searched over full parity states.

A walk state after ``i`` steps is ``(v_i, arrow_i, parity_i)``: the current
vertex, whether the last edge was in the running set ``F_{i-1}`` (down) or not
(up), and the bitmask of edges traversed an odd number of times.  Because the
running set ``F_i`` is ``F`` xor the parity mask, this state determines every
future move, so breadth-first search over it is exact.  The state space can be
exponential; callers pass a budget.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Callable, Iterable, Iterator

from .graph import Edge, Graph, norm_edge

UP = 0
DOWN = 1

_TYPE_ALIASES = {
    "↑↑": (UP, UP),
    "↑↓": (UP, DOWN),
    "↓↑": (DOWN, UP),
    "↓↓": (DOWN, DOWN),
    "uu": (UP, UP),
    "ud": (UP, DOWN),
    "du": (DOWN, UP),
    "dd": (DOWN, DOWN),
}


def parse_walk_type(t: str | tuple[int, int]) -> tuple[int, int]:
    if isinstance(t, tuple):
        return t
    try:
        return _TYPE_ALIASES[t]
    except KeyError:
        raise ValueError(f"unknown walk type {t!r}") from None


class SearchBudgetExceeded(RuntimeError):
    pass


class EdgeIndex:
    """Dense edge numbering so edge sets become int bitmasks."""

    def __init__(self, g: Graph):
        self.g = g
        self.edges = g.edges()
        self.index = {e: i for i, e in enumerate(self.edges)}
        self.incident: list[list[tuple[int, int]]] = [[] for _ in range(g.n)]
        for i, (u, v) in enumerate(self.edges):
            self.incident[u].append((v, i))
            self.incident[v].append((u, i))
        for lst in self.incident:
            lst.sort()

    def mask(self, edges: Iterable[Edge]) -> int:
        m = 0
        for u, v in edges:
            m |= 1 << self.index[norm_edge(u, v)]
        return m

    def edge_list(self, mask: int) -> list[Edge]:
        out = []
        while mask:
            low = mask & -mask
            out.append(self.edges[low.bit_length() - 1])
            mask ^= low
        return out


State = tuple[int, int, int]  # vertex, arrow of last edge, parity mask


def walk_states(
    idx: EdgeIndex,
    fmask: int,
    start: int,
    first: int,
    budget: int | None = 200_000,
) -> Iterator[tuple[State, int]]:
    """Yield every reachable nonempty-walk state once, with its walk length, in BFS order."""
    seen: set[State] = set()
    queue: deque[tuple[State, int]] = deque()
    for u, j in idx.incident[start]:
        in_f = (fmask >> j) & 1
        if in_f != first:
            continue
        st = (u, DOWN if in_f else UP, 1 << j)
        if st not in seen:
            seen.add(st)
            queue.append((st, 1))
    while queue:
        st, length = queue.popleft()
        yield st, length
        v, arrow, pmask = st
        cur = fmask ^ pmask
        want = 0 if arrow == DOWN else 1
        for u, j in idx.incident[v]:
            in_cur = (cur >> j) & 1
            if in_cur != want:
                continue
            nxt = (u, DOWN if in_cur else UP, pmask ^ (1 << j))
            if nxt not in seen:
                if budget is not None and len(seen) >= budget:
                    raise SearchBudgetExceeded(f"more than {budget} walk states")
                seen.add(nxt)
                queue.append((nxt, length + 1))


def reach_by_states(
    g: Graph,
    f_edges: Iterable[Edge],
    start: int,
    walk_type: str | tuple[int, int],
    accept: Callable[[int, int], bool] | None = None,
    budget: int | None = 200_000,
) -> set[int]:
    """End vertices of walks of the given type, optionally filtered by ``accept(end, parity)``.

    The empty walk counts as type up-down, so ``start`` is included for that
    type when ``accept`` allows the empty parity.
    """
    first, last = parse_walk_type(walk_type)
    idx = EdgeIndex(g)
    fmask = idx.mask(f_edges)
    out: set[int] = set()
    if (first, last) == (UP, DOWN) and (accept is None or accept(start, 0)):
        out.add(start)
    for (v, arrow, pmask), _ in walk_states(idx, fmask, start, first, budget):
        if arrow == last and (accept is None or accept(v, pmask)):
            out.add(v)
    return out


def is_alternating_walk(g: Graph, f_edges: Iterable[Edge], walk: list[int]) -> tuple[int, int] | None:
    """Type of ``walk`` if it is F-alternating in the parity sense, else None."""
    if len(walk) < 2:
        return (UP, DOWN) if len(walk) == 1 else None
    cur = {norm_edge(u, v) for u, v in f_edges}
    prev_arrow = None
    first = None
    for a, b in zip(walk, walk[1:]):
        if not g.has_edge(a, b):
            return None
        e = norm_edge(a, b)
        in_cur = e in cur
        arrow = DOWN if in_cur else UP
        if prev_arrow is not None:
            # after a down edge the next must be up and vice versa
            if arrow == prev_arrow:
                return None
        if first is None:
            first = arrow
        cur ^= {e}
        prev_arrow = arrow
    return (first, prev_arrow)


def symmetric_difference(f_edges: Iterable[Edge], walk: list[int]) -> set[Edge]:
    cur = {norm_edge(u, v) for u, v in f_edges}
    for a, b in zip(walk, walk[1:]):
        cur ^= {norm_edge(a, b)}
    return cur
