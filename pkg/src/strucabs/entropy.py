"""Structural entropy of graphs under encoding trees.

All logarithms are base 2. Node terms follow the usual definition

    H(alpha) = -(g_alpha / vol(G)) * log2(V_alpha / V_parent)

where ``g_alpha`` is the weight leaving the node's vertex set and ``V`` are
subtree volumes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidInputError
from .graph import Graph
from .tree import EncodingTree


@dataclass(frozen=True)
class NodeEntropy:
    node: int
    g_alpha: float
    v_alpha: float
    assigned_se: float


def one_dim_entropy(g: Graph) -> float:
    vol = g.volume
    d = np.asarray(g.degrees)
    if vol <= 0:
        raise InvalidInputError("graph has zero volume")
    if np.any(d <= 0):
        bad = int(np.flatnonzero(d <= 0)[0])
        raise InvalidInputError(f"vertex {bad} has zero degree; drop isolated vertices first")
    p = d / vol
    return float(-np.sum(p * np.log2(p)))


def _term(cut: float, vol_node: float, vol_parent: float, vol_graph: float) -> float:
    if cut <= 0.0 or vol_node <= 0.0:
        return 0.0
    return -(cut / vol_graph) * math.log2(vol_node / vol_parent)


def _check_tree(g: Graph, t: EncodingTree) -> None:
    if t[t.root].vertices != frozenset(range(g.vertex_count)):
        raise InvalidInputError("encoding tree does not cover the graph's vertices")


def node_entropies(g: Graph, t: EncodingTree) -> dict[int, NodeEntropy]:
    """Cut weight, volume and assigned entropy of every non-root node."""
    _check_tree(g, t)
    vol = g.volume
    if vol <= 0:
        raise InvalidInputError("graph has zero volume")
    adj = g.adjacency
    deg = np.asarray(g.degrees)
    n = g.vertex_count

    vols: dict[int, float] = {}
    cuts: dict[int, float] = {}
    for nid, node in t.nodes.items():
        idx = np.fromiter(node.vertices, dtype=int, count=len(node.vertices))
        vols[nid] = float(deg[idx].sum())
        mask = np.ones(n, dtype=bool)
        mask[idx] = False
        cuts[nid] = float(adj[np.ix_(idx, np.flatnonzero(mask))].sum()) if mask.any() else 0.0

    out = {}
    for nid, node in t.nodes.items():
        if node.parent is None:
            continue
        out[nid] = NodeEntropy(
            nid, cuts[nid], vols[nid], _term(cuts[nid], vols[nid], vols[node.parent], vol)
        )
    return out


def assigned_entropy(g: Graph, t: EncodingTree, node: int) -> float:
    if t[node].parent is None:
        raise DomainError("the root has no assigned entropy")
    return node_entropies(g, t)[node].assigned_se


def tree_entropy(g: Graph, t: EncodingTree) -> float:
    return math.fsum(e.assigned_se for e in node_entropies(g, t).values())


def _entropy_map(g, t, entropies):
    if entropies is None:
        entropies = node_entropies(g, t)
    return {k: (v.assigned_se if isinstance(v, NodeEntropy) else float(v)) for k, v in entropies.items()}


def _path_sum(t: EncodingTree, leaf: int, stop: int, h: dict[int, float]) -> float:
    total = 0.0
    for nid in t.ancestors(leaf):
        if nid == stop:
            return total
        total += h[nid]
    raise DomainError(f"node {stop} is not an ancestor of leaf {leaf}")


def structural_probability(
    g: Graph, t: EncodingTree, center: int, entropies=None
) -> dict[int, float]:
    """Normalized distribution over the vertices of a root child.

    Each vertex gets ``exp(-sum of assigned entropies)`` along the path from
    its leaf up to, but excluding, ``center``.
    """
    if t[center].parent != t.root:
        raise DomainError(f"node {center} is not a child of the root")
    h = _entropy_map(g, t, entropies)
    raw = {
        v: math.exp(-_path_sum(t, t.leaf_of(v), center, h))
        for v in sorted(t[center].vertices)
    }
    z = math.fsum(raw.values())
    return {v: x / z for v, x in raw.items()}


def conditional_entropy(
    g: Graph, t: EncodingTree, i: int, j: int, entropies=None
) -> float:
    """Path sum of assigned entropies from leaf ``j`` up to the lowest common
    ancestor of leaves ``i`` and ``j`` (exclusive)."""
    if i == j:
        raise DomainError("conditional entropy needs two distinct leaves")
    if not (t.is_leaf(i) and t.is_leaf(j)):
        raise DomainError("conditional entropy is defined between leaves")
    h = _entropy_map(g, t, entropies)
    return _path_sum(t, j, t.lca(i, j), h)
