import networkx as nx
import numpy as np

from fixdeg.corpus import CONNECTED_COUNTS, connected8, connected_atlas, connected_corpus, from_nx, random_graphs, to_nx


def test_counts_per_order():
    corpus = connected_corpus(8)
    for n, want in CONNECTED_COUNTS.items():
        assert sum(1 for g in corpus if g.n == n) == want
    assert len(connected8()) == 11117


def test_corpus_connected_and_distinct():
    small = connected_atlas(6)
    assert all(nx.is_connected(to_nx(g)) for g in small)
    hashes = {nx.weisfeiler_lehman_graph_hash(to_nx(g)) for g in connected8()[:2000]}
    assert len(hashes) > 1900
    assert all(nx.is_connected(to_nx(g)) for g in connected8()[::97])


def test_nx_round_trip():
    h = nx.petersen_graph()
    g = from_nx(h)
    assert nx.is_isomorphic(to_nx(g), h)


def test_random_graphs_seeded():
    a = random_graphs(20, np.random.default_rng(4))
    b = random_graphs(20, np.random.default_rng(4))
    assert [x.edges() for x in a] == [y.edges() for y in b]
    assert all(4 <= g.n <= 12 for g in a)
