"""Brute-force reference computations for small graphs.

These are deliberately naive and independent of the fast routines they check.
"""

from __future__ import annotations

from collections.abc import Iterator
from itertools import combinations, permutations, product

from .graph import Edge, Graph, norm_edge


def max_k_matching_size_bb(g: Graph, k: int | list[int]) -> int:
    """Largest edge set with d(v) <= k by include/exclude branch and bound."""
    caps = [k] * g.n if isinstance(k, int) else list(k)
    edges = g.edges()
    m = len(edges)
    cap_total = sum(min(c, g.degree(v)) for v, c in enumerate(caps)) // 2
    ceiling = min(m, cap_total)
    res = [0] * g.n
    best = 0

    # remaining degree after index i, for the bound
    def rec(i: int, size: int) -> bool:
        nonlocal best
        if size > best:
            best = size
            if best == ceiling:
                return True
        if i == m:
            return False
        if size + (m - i) <= best:
            return False
        slack = 0
        for v in range(g.n):
            slack += min(caps[v] - res[v], rem_deg[i][v])
        if size + slack // 2 <= best:
            return False
        u, v = edges[i]
        if res[u] < caps[u] and res[v] < caps[v]:
            res[u] += 1
            res[v] += 1
            stop = rec(i + 1, size + 1)
            res[u] -= 1
            res[v] -= 1
            if stop:
                return True
        return rec(i + 1, size)

    rem_deg = [[0] * g.n for _ in range(m + 1)]
    for i in range(m - 1, -1, -1):
        rem_deg[i] = list(rem_deg[i + 1])
        u, v = edges[i]
        rem_deg[i][u] += 1
        rem_deg[i][v] += 1
    rec(0, 0)
    return best


def lambda_k_exhaustive(g: Graph, k: int) -> int:
    return k * g.n // 2 - max_k_matching_size_bb(g, k)


def all_k_matchings(g: Graph, k: int) -> Iterator[frozenset[Edge]]:
    edges = g.edges()
    for bits in product((0, 1), repeat=len(edges)):
        deg = [0] * g.n
        chosen = []
        ok = True
        for b, (u, v) in zip(bits, edges):
            if b:
                deg[u] += 1
                deg[v] += 1
                if deg[u] > k or deg[v] > k:
                    ok = False
                    break
                chosen.append((u, v))
        if ok:
            yield frozenset(chosen)


def maximum_k_matchings(g: Graph, k: int) -> list[frozenset[Edge]]:
    best: list[frozenset[Edge]] = []
    size = -1
    for f in all_k_matchings(g, k):
        if len(f) > size:
            size, best = len(f), [f]
        elif len(f) == size:
            best.append(f)
    return best


def deficiency_sets_by_enumeration(g: Graph, k: int) -> tuple[set[int], dict[int, set[int]]]:
    X: set[int] = set()
    pairs: set[tuple[int, int]] = set()
    for f in maximum_k_matchings(g, k):
        deg = [0] * g.n
        for u, v in f:
            deg[u] += 1
            deg[v] += 1
        low = [v for v in range(g.n) if deg[v] < k]
        X.update(low)
        for a in low:
            for b in low:
                if a != b:
                    pairs.add((a, b))
    Y = {x: {y for (a, y) in pairs if a == x} for x in X}
    return X, Y


def beta_naive(g: Graph, k: int) -> int:
    """max over disjoint (A, B) of e(A,B) + k(|A| - |B|) - d(A), by full 3^n enumeration."""
    best = None
    deg = g.degrees()
    for labels in product((0, 1, 2), repeat=g.n):
        A = [v for v in range(g.n) if labels[v] == 1]
        Bset = {v for v in range(g.n) if labels[v] == 2}
        e_ab = sum(1 for a in A for b in g.neighbors(a) if b in Bset)
        val = e_ab + k * (len(A) - len(Bset)) - sum(deg[a] for a in A)
        if best is None or val > best:
            best = val
    return best if best is not None else 0


def simple_cycles(g: Graph) -> Iterator[tuple[int, ...]]:
    """Each simple cycle (length >= 3) once, as a vertex tuple starting at its minimum."""
    for s in range(g.n):
        stack = [(s, [s])]
        while stack:
            v, path = stack.pop()
            for u in g.neighbors(v):
                if u == s and len(path) >= 3 and path[1] < path[-1]:
                    yield tuple(path)
                elif u > s and u not in path:
                    stack.append((u, path + [u]))


def shortest_cycle_through_vertex(g: Graph) -> list[float]:
    best = [float("inf")] * g.n
    for cyc in simple_cycles(g):
        for v in cyc:
            best[v] = min(best[v], len(cyc))
    return best


def hamiltonian_bruteforce(g: Graph) -> bool:
    n = g.n
    if n < 3:
        return False
    for perm in permutations(range(1, n)):
        if perm[0] > perm[-1]:
            continue
        cyc = (0,) + perm
        if all(g.has_edge(cyc[i], cyc[(i + 1) % n]) for i in range(n)):
            return True
    return False


def two_factors_bruteforce(g: Graph) -> list[frozenset[Edge]]:
    """All spanning 2-regular subgraphs, via edge subsets of size n."""
    out = []
    edges = g.edges()
    for sub in combinations(edges, g.n):
        deg = [0] * g.n
        for u, v in sub:
            deg[u] += 1
            deg[v] += 1
        if all(d == 2 for d in deg):
            out.append(frozenset(sub))
    return out


def components_of_edges(n: int, edges) -> int:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        parent[find(u)] = find(v)
    return len({find(v) for v in range(n)})


def kappa2_bruteforce(g: Graph) -> int | None:
    best = None
    for f in two_factors_bruteforce(g):
        c = components_of_edges(g.n, f)
        if best is None or c < best:
            best = c
    return best


def edge_key(u: int, v: int) -> Edge:
    return norm_edge(u, v)
