"""Small-graph corpora: every connected graph up to 8 vertices, and random graphs."""

from __future__ import annotations

import itertools
from functools import lru_cache
from importlib import resources
from pathlib import Path

import networkx as nx
import numpy as np

from .graph import Graph

CONNECTED_COUNTS = {1: 1, 2: 1, 3: 2, 4: 6, 5: 21, 6: 112, 7: 853, 8: 11117}


def from_nx(h: nx.Graph) -> Graph:
    nodes = sorted(h.nodes())
    index = {v: i for i, v in enumerate(nodes)}
    return Graph(len(nodes), ((index[u], index[v]) for u, v in h.edges()))


def to_nx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    return h


def connected_atlas(max_n: int = 7) -> list[Graph]:
    """Connected graphs with 1..max_n (<= 7) vertices from the networkx atlas."""
    if max_n > 7:
        raise ValueError("the atlas stops at 7 vertices")
    return [from_nx(h) for h in nx.graph_atlas_g() if 0 < h.number_of_nodes() <= max_n and nx.is_connected(h)]


def generate_connected8() -> list[nx.Graph]:
    """Connected 8-vertex graphs up to isomorphism.

    Every connected graph on 8 vertices has a non-cut vertex, so it arises by
    joining a new vertex to a connected 7-vertex graph. Candidates are bucketed
    by degree sequence and Weisfeiler-Lehman hash before exact isomorphism tests.
    """
    base = [h for h in nx.graph_atlas_g() if h.number_of_nodes() == 7 and nx.is_connected(h)]
    buckets: dict[tuple, list[nx.Graph]] = {}
    out = []
    for h0 in base:
        for r in range(1, 8):
            for nb in itertools.combinations(range(7), r):
                h = h0.copy()
                h.add_node(7)
                h.add_edges_from((7, v) for v in nb)
                key = (
                    tuple(sorted(d for _, d in h.degree())),
                    nx.weisfeiler_lehman_graph_hash(h, iterations=3),
                )
                lst = buckets.setdefault(key, [])
                if any(nx.faster_could_be_isomorphic(h, o) and nx.is_isomorphic(h, o) for o in lst):
                    continue
                lst.append(h)
                out.append(h)
    return out


def _data_path() -> Path:
    return Path(str(resources.files("fixdeg") / "data" / "connected8.g6"))


@lru_cache(maxsize=1)
def connected8() -> tuple[Graph, ...]:
    path = _data_path()
    graphs = nx.read_graph6(path)
    if isinstance(graphs, nx.Graph):
        graphs = [graphs]
    return tuple(from_nx(h) for h in graphs)


def connected_corpus(max_n: int = 8) -> list[Graph]:
    """All connected graphs on 1..max_n vertices, one per isomorphism class."""
    out = connected_atlas(min(max_n, 7))
    if max_n >= 8:
        out.extend(connected8())
    return out


def random_graphs(count: int, rng: np.random.Generator, n_range=(4, 12), p_range=(0.2, 0.7)) -> list[Graph]:
    """Erdos-Renyi graphs with n and p drawn uniformly from the given ranges."""
    out = []
    for _ in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        p = float(rng.uniform(*p_range))
        iu = np.triu_indices(n, 1)
        keep = rng.random(len(iu[0])) < p
        out.append(Graph(n, zip(iu[0][keep].tolist(), iu[1][keep].tolist())))
    return out


def write_connected8(path: str | Path) -> int:
    graphs = generate_connected8()
    with open(path, "wb") as fh:
        for h in graphs:
            fh.write(nx.to_graph6_bytes(h, header=False))
    return len(graphs)
