import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from strucabs import (
    EncodingTree,
    Graph,
    assigned_entropy,
    conditional_entropy,
    one_dim_entropy,
    structural_probability,
    tree_entropy,
)
from strucabs.entropy import node_entropies
from strucabs.errors import DomainError, InvalidInputError

import oracles
from conftest import STAR3, TRIANGLE, weighted_graphs


def test_one_dim_examples():
    assert one_dim_entropy(Graph(3, TRIANGLE)) == pytest.approx(math.log2(3), abs=1e-12)
    assert one_dim_entropy(Graph(2, [(0, 1, 7.3)])) == pytest.approx(1.0, abs=1e-12)
    star = one_dim_entropy(Graph(4, STAR3))
    assert star == pytest.approx(oracles.one_dim(4, STAR3), abs=1e-12)
    assert star == pytest.approx(1.79248, abs=1e-5)


def test_one_dim_rejects_isolated_vertex():
    with pytest.raises(InvalidInputError):
        one_dim_entropy(Graph(3, [(0, 1, 1.0)]))


def test_assigned_entropy_examples(cycle4, triangle):
    t = EncodingTree.from_partition(4, [[0, 1], [2, 3]])
    pair = t[0].parent
    assert assigned_entropy(cycle4, t, pair) == pytest.approx(0.25, abs=1e-12)
    flat = EncodingTree.flat(3)
    assert assigned_entropy(triangle, flat, 0) == pytest.approx(-(2 / 6) * math.log2(2 / 6), abs=1e-12)
    assert assigned_entropy(triangle, flat, 0) == pytest.approx(0.52832, abs=1e-5)
    with pytest.raises(DomainError):
        assigned_entropy(cycle4, t, t.root)


def test_zero_cut_node_has_zero_entropy():
    g = Graph(4, [(0, 1, 1.0), (2, 3, 1.0)])
    t = EncodingTree.from_partition(4, [[0, 1], [2, 3]])
    assert assigned_entropy(g, t, t[0].parent) == 0.0


def test_tree_entropy_examples(cycle4):
    assert tree_entropy(cycle4, EncodingTree.flat(4)) == pytest.approx(2.0, abs=1e-12)
    adjacent = EncodingTree.from_partition(4, [[0, 1], [2, 3]])
    assert tree_entropy(cycle4, adjacent) == pytest.approx(1.5, abs=1e-12)
    crossing = EncodingTree.from_partition(4, [[0, 2], [1, 3]])
    assert tree_entropy(cycle4, crossing) == pytest.approx(2.0, abs=1e-12)


def test_tree_entropy_rejects_mismatched_tree(cycle4):
    with pytest.raises(InvalidInputError):
        tree_entropy(cycle4, EncodingTree.flat(5))


@pytest.mark.parametrize(
    "blocks",
    [[[0, 1], [2, [3, 4]], 5], [[[0, 1], [2, 3]], [4, 5]], [0, 1, 2, 3, 4, 5], [[0, 5], [1, [2, 4]], 3]],
)
def test_tree_entropy_matches_oracle(blocks, rng):
    edges = [(u, v, float(rng.uniform(0.1, 2))) for u in range(6) for v in range(u + 1, 6) if rng.random() < 0.7]
    edges += [(0, 1, 0.5)] if not any(e[:2] == (0, 1) for e in edges) else []
    g = Graph(6, edges)
    if np.any(g.degrees == 0):
        pytest.skip("isolated vertex in draw")
    t = EncodingTree.from_partition(6, blocks)
    assert tree_entropy(g, t) == pytest.approx(oracles.nested_entropy(6, edges, blocks), abs=1e-12)


def test_structural_probability_examples(cycle4):
    t = EncodingTree.from_partition(4, [[0, 1], [2, 3]])
    p = structural_probability(cycle4, t, t[0].parent)
    assert p[0] == pytest.approx(0.5) and p[1] == pytest.approx(0.5)

    g = Graph(3, TRIANGLE)
    t = EncodingTree.from_partition(3, [[0], [1, 2]])
    assert structural_probability(g, t, t[0].parent) == {0: 1.0}

    with pytest.raises(DomainError):
        structural_probability(cycle4, EncodingTree.from_partition(4, [[0, 1], [2, 3]]), 0)


def test_structural_probability_uses_path_sums():
    # path 0-1-2 with unequal weights; cluster {0, 1} under the root
    g = Graph(3, [(0, 1, 1.0), (1, 2, 3.0)])
    t = EncodingTree.from_partition(3, [[0, 1], 2])
    h = node_entropies(g, t)
    raw = {v: math.exp(-h[v].assigned_se) for v in (0, 1)}
    total = sum(raw.values())
    p = structural_probability(g, t, t[0].parent)
    for v in (0, 1):
        assert p[v] == pytest.approx(raw[v] / total, abs=1e-12)


def test_structural_probability_ratio_example():
    a, b = math.exp(-0.25), math.exp(-0.5)
    assert (a / (a + b), b / (a + b)) == pytest.approx((0.5622, 0.4378), abs=1e-4)


def test_conditional_entropy_examples(cycle4):
    t = EncodingTree.from_partition(4, [[0, 1], [2, 3]])
    assert conditional_entropy(cycle4, t, 0, 2) == pytest.approx(0.5, abs=1e-12)
    assert conditional_entropy(cycle4, t, 0, 1) == pytest.approx(assigned_entropy(cycle4, t, 1))
    flat = EncodingTree.flat(4)
    assert conditional_entropy(cycle4, flat, 0, 3) == pytest.approx(assigned_entropy(cycle4, flat, 3))
    with pytest.raises(DomainError):
        conditional_entropy(cycle4, t, 1, 1)


@given(weighted_graphs(max_n=14))
def test_flat_tree_identity(g):
    assert tree_entropy(g, EncodingTree.flat(g.vertex_count)) == pytest.approx(one_dim_entropy(g), abs=1e-9)


@given(weighted_graphs(max_n=14))
def test_one_dim_bounds(g):
    h = one_dim_entropy(g)
    assert -1e-12 <= h <= math.log2(g.vertex_count) + 1e-12


def _random_tree(n, seed):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, max(2, n // 2), size=n)
    blocks = []
    for lab in sorted(set(labels.tolist())):
        members = [int(v) for v in np.flatnonzero(labels == lab)]
        if len(members) > 3:
            half = len(members) // 2
            blocks.append([members[:half], members[half:]])
        else:
            blocks.append(members if len(members) > 1 else members[0])
    return EncodingTree.from_partition(n, blocks)


@given(weighted_graphs(min_n=3, max_n=12), st.integers(0, 10_000), st.sampled_from([0.01, 3.7, 100.0]))
def test_scale_invariance_and_nonnegativity(g, seed, c):
    t = _random_tree(g.vertex_count, seed)
    s = g.scaled(c)
    assert one_dim_entropy(s) == pytest.approx(one_dim_entropy(g), abs=1e-9)
    assert tree_entropy(s, t) == pytest.approx(tree_entropy(g, t), abs=1e-9)
    h, hs = node_entropies(g, t), node_entropies(s, t)
    for nid, rec in h.items():
        assert rec.assigned_se >= 0.0
        assert rec.g_alpha <= rec.v_alpha + 1e-12
        assert hs[nid].assigned_se == pytest.approx(rec.assigned_se, abs=1e-9)
    assert conditional_entropy(s, t, 0, 1) == pytest.approx(conditional_entropy(g, t, 0, 1), abs=1e-9)


@given(weighted_graphs(min_n=3, max_n=12), st.integers(0, 10_000))
def test_structural_probability_sums_to_one(g, seed):
    t = _random_tree(g.vertex_count, seed)
    for center in t[t.root].children:
        p = structural_probability(g, t, center)
        assert set(p) == set(t[center].vertices)
        assert sum(p.values()) == pytest.approx(1.0, abs=1e-12)
        assert all(0.0 < x <= 1.0 for x in p.values())
