import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from strucabs import EmbeddingSet, Graph, degree, similarity_graph, volume
from strucabs.errors import InvalidInputError
from strucabs.graph import EDGE_WEIGHT_FLOOR

from conftest import STAR3, TRIANGLE, weighted_graphs


def test_degree_examples():
    assert degree(Graph(3, TRIANGLE), 0) == 2.0
    assert degree(Graph(3, [(0, 1, 1.0)]), 2) == 0.0
    assert degree(Graph(4, STAR3), 0) == 3.0


def test_degree_out_of_range():
    with pytest.raises(IndexError):
        degree(Graph(3, TRIANGLE), 3)


def test_volume_examples():
    assert volume(Graph(3, TRIANGLE)) == 6.0
    assert volume(Graph(2, [(0, 1, 0.5)])) == 1.0
    assert volume(Graph(3)) == 0.0


@pytest.mark.parametrize(
    "edges",
    [
        [(0, 0, 1.0)],
        [(0, 1, 1.0), (1, 0, 2.0)],
        [(0, 1, 0.0)],
        [(0, 1, -1.0)],
        [(0, 1, math.nan)],
        [(0, 5, 1.0)],
    ],
)
def test_graph_rejects_bad_edges(edges):
    with pytest.raises(InvalidInputError):
        Graph(3, edges)


def test_graph_rejects_duplicate_labels():
    with pytest.raises(InvalidInputError):
        Graph(2, [(0, 1, 1.0)], ["a", "a"])


def test_subgraph_and_components():
    g = Graph(5, [(0, 1, 1.0), (3, 4, 2.0)])
    assert g.components() == [[0, 1], [2], [3, 4]]
    sub = g.subgraph([3, 4])
    assert sub.vertex_count == 2 and sub.weight(0, 1) == 2.0
    assert sub.vertex_labels == ("3", "4")


@given(weighted_graphs(min_n=1, max_n=15, no_isolated=False))
def test_volume_is_twice_total_weight(g):
    assert volume(g) == pytest.approx(2 * math.fsum(w for _, _, w in g.edge_list()), rel=1e-12)
    assert volume(g) == pytest.approx(sum(degree(g, v) for v in range(g.vertex_count)), rel=1e-12)


def test_similarity_examples():
    g = similarity_graph(EmbeddingSet(np.array([[1.0, 0.0], [1.0, 0.0]]), ("a", "b")))
    assert g.edge_list() == [(0, 1, pytest.approx(1.0))]
    g = similarity_graph(EmbeddingSet(np.array([[1.0, 0.0], [0.0, 1.0]]), ("a", "b")))
    assert g.edge_count == 0
    g = similarity_graph(EmbeddingSet(np.array([[1.0, 0.0], [-1.0, 0.0]]), ("a", "b")))
    assert g.weight(0, 1) == pytest.approx(1.0)


def test_similarity_matches_direct_cosine(rng):
    z = rng.normal(size=(7, 4))
    g = similarity_graph(EmbeddingSet(z, tuple(map(str, range(7)))))
    for u in range(7):
        for v in range(u + 1, 7):
            c = abs(z[u] @ z[v]) / (np.linalg.norm(z[u]) * np.linalg.norm(z[v]))
            assert g.weight(u, v) == pytest.approx(c, abs=1e-12)


def test_embedding_validation():
    with pytest.raises(InvalidInputError):
        EmbeddingSet(np.array([[1.0, 0.0], [0.0, 0.0]]), ("a", "b"))
    with pytest.raises(InvalidInputError):
        EmbeddingSet(np.array([[1.0, np.inf]]), ("a",))
    with pytest.raises(InvalidInputError):
        similarity_graph(EmbeddingSet(np.array([[1.0, 0.0]]), ("a",)))


@given(
    st.integers(2, 9).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.lists(
                st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=3),
                min_size=n,
                max_size=n,
            ),
            st.permutations(range(n)),
        )
    )
)
def test_similarity_permutation_and_range(args):
    n, rows, perm = args
    z = np.array(rows) + np.array([1e-3, 0.0, 0.0])  # keep rows nonzero
    z[np.linalg.norm(z, axis=1) < 1e-6] = [1.0, 0.0, 0.0]
    labels = tuple(str(i) for i in range(n))
    g = similarity_graph(EmbeddingSet(z, labels))
    h = similarity_graph(EmbeddingSet(z[list(perm)], labels))
    assert sorted(w for *_, w in g.edge_list()) == pytest.approx(sorted(w for *_, w in h.edge_list()))
    for _, _, w in g.edge_list():
        assert EDGE_WEIGHT_FLOOR < w <= 1.0 + 1e-12
