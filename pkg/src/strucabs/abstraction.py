"""Cluster embeddings, hierarchical aggregation and relation reconstruction
on top of an optimized encoding tree."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .entropy import node_entropies, structural_probability
from .errors import (
    DegenerateClusterError,
    DivergenceError,
    DomainError,
    InvalidInputError,
)
from .graph import EDGE_WEIGHT_FLOOR, EmbeddingSet, Graph
from .optimize import OptimizeConfig, optimize
from .tree import EncodingTree

RELATIONS = ("transition", "action", "reward")


# -- clustering loss --------------------------------------------------------


@dataclass
class ClusterModel:
    center_ids: list[int]
    centers: np.ndarray
    soft_assignment: np.ndarray | None = None
    target: np.ndarray | None = None

    @property
    def loss(self) -> float:
        if self.soft_assignment is None or self.target is None:
            raise InvalidInputError("soft assignment has not been computed")
        return clustering_loss(self.target, self.soft_assignment)


def cluster_centers(g: Graph, t: EncodingTree, e: EmbeddingSet) -> ClusterModel:
    """One center per root child: the structural-probability weighted mean of
    its members' embeddings."""
    if e.count != g.vertex_count:
        raise InvalidInputError(
            f"{e.count} embeddings for a graph with {g.vertex_count} vertices"
        )
    ent = node_entropies(g, t)
    ids = list(t[t.root].children)
    centers = np.zeros((len(ids), e.dimension))
    for k, cid in enumerate(ids):
        probs = structural_probability(g, t, cid, ent)
        for v, p in probs.items():
            centers[k] += p * e.vectors[v]
    return ClusterModel(ids, centers)


def soft_assignment(z, centers) -> np.ndarray:
    """Student-t (one degree of freedom) kernel, normalized per row."""
    z = z.vectors if isinstance(z, EmbeddingSet) else np.asarray(z, dtype=float)
    centers = np.asarray(centers, dtype=float)
    if centers.ndim != 2 or centers.shape[0] < 1:
        raise InvalidInputError("need at least one center")
    if centers.shape[1] != z.shape[1]:
        raise InvalidInputError("center and embedding dimensions differ")
    sq = ((z[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    q = 1.0 / (1.0 + sq)
    return q / q.sum(axis=1, keepdims=True)


def target_distribution(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    freq = q.sum(axis=0)
    if np.any(freq <= 0):
        raise DegenerateClusterError("a cluster receives no soft assignment mass")
    p = q**2 / freq
    return p / p.sum(axis=1, keepdims=True)


def clustering_loss(p, q) -> float:
    """KL(P || Q) in nats, summed over all rows."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise InvalidInputError("P and Q shapes differ")
    mass = p > 0
    if np.any(mass & (q <= 0)):
        raise DivergenceError("Q is zero where P has mass")
    return float(np.sum(p[mass] * np.log(p[mass] / q[mass])))


def cluster_model(g: Graph, t: EncodingTree, e: EmbeddingSet) -> ClusterModel:
    model = cluster_centers(g, t, e)
    model.soft_assignment = soft_assignment(e, model.centers)
    model.target = target_distribution(model.soft_assignment)
    return model


# -- hierarchical aggregation ----------------------------------------------


@dataclass
class LevelRepresentations:
    vectors: dict[int, np.ndarray]
    heights: dict[int, int]
    weights: dict[int, dict[int, float]] = field(default_factory=dict)

    def at_height(self, h: int) -> dict[int, np.ndarray]:
        return {k: v for k, v in self.vectors.items() if self.heights[k] == h}


def aggregate(t: EncodingTree, g: Graph, e: EmbeddingSet) -> LevelRepresentations:
    """Bottom-up convex combinations weighted by children's assigned entropy.

    Leaves carry the input embeddings. When every child of a node has zero
    assigned entropy the children are averaged uniformly.
    """
    if e.count != g.vertex_count:
        raise InvalidInputError("embeddings are not aligned with graph vertices")
    ent = node_entropies(g, t)
    vectors: dict[int, np.ndarray] = {}
    heights: dict[int, int] = {}
    weights: dict[int, dict[int, float]] = {}
    for nid in t.bottom_up():
        node = t.nodes[nid]
        heights[nid] = node.height
        if node.is_leaf:
            vectors[nid] = e.vectors[next(iter(node.vertices))].copy()
            continue
        h = np.array([ent[c].assigned_se for c in node.children])
        w = h / h.sum() if h.sum() > 0 else np.full(len(h), 1.0 / len(h))
        weights[nid] = dict(zip(node.children, w.tolist()))
        vectors[nid] = sum(wi * vectors[c] for wi, c in zip(w, node.children))
    return LevelRepresentations(vectors, heights, weights)


# -- trajectories and relation graphs ---------------------------------------


class Step(NamedTuple):
    s: str
    a: int
    r: float
    s2: str


@dataclass(frozen=True)
class TrajectoryLog:
    steps: tuple[Step, ...]
    action_count: int

    @classmethod
    def from_steps(cls, steps, action_count: int | None = None) -> "TrajectoryLog":
        steps = tuple(Step(str(s), int(a), float(r), str(s2)) for s, a, r, s2 in steps)
        if not steps:
            raise InvalidInputError("trajectory log is empty")
        for st in steps:
            if not math.isfinite(st.r):
                raise InvalidInputError(f"non-finite reward in step {st}")
            if st.a < 0:
                raise InvalidInputError(f"negative action id in step {st}")
        if action_count is None:
            action_count = max(st.a for st in steps) + 1
        return cls(steps, action_count)

    def check_labels(self, labels: Sequence[str]) -> None:
        known = set(labels)
        for st in self.steps:
            for lab in (st.s, st.s2):
                if lab not in known:
                    raise InvalidInputError(f"state {lab!r} is not in the embedding set")


@dataclass
class RelationGraphs:
    """Relation graphs per (level, relation); ``members[level][i]`` is the
    tree node behind vertex ``i`` of that level's graphs."""

    graphs: dict[tuple[int, str], Graph]
    members: dict[int, list[int]]

    @property
    def levels(self) -> list[int]:
        return sorted(self.members)


def level_nodes(t: EncodingTree, level: int) -> dict[int, int]:
    """Vertex -> its node at ``level`` (the highest non-root ancestor of height <= level)."""
    return {v: t.cut_ancestor(v, level) for v in range(t.vertex_count)}


def _map_steps(t, log, index, level):
    at = level_nodes(t, level)
    return [(at[index[st.s]], st.a, st.r, at[index[st.s2]]) for st in log.steps]


def transition_probabilities(mapped) -> dict[int, dict[int, float]]:
    """Empirical P(next | source) over mapped steps, self-transitions included."""
    counts: dict[int, dict[int, int]] = {}
    for u, _, _, v in mapped:
        row = counts.setdefault(u, {})
        row[v] = row.get(v, 0) + 1
    out = {}
    for u, row in counts.items():
        total = sum(row.values())
        out[u] = {v: c / total for v, c in row.items()}
    return out


def _action_probabilities(mapped) -> dict[int, dict[int, float]]:
    counts: dict[tuple[int, int], dict[int, int]] = {}
    for u, a, _, v in mapped:
        row = counts.setdefault((u, a), {})
        row[v] = row.get(v, 0) + 1
    best: dict[int, dict[int, float]] = {}
    for (u, _), row in counts.items():
        total = sum(row.values())
        slot = best.setdefault(u, {})
        for v, c in row.items():
            slot[v] = max(slot.get(v, 0.0), c / total)
    return best


def _symmetric(prob: dict[int, dict[int, float]]) -> dict[tuple[int, int], float]:
    pairs: dict[tuple[int, int], float] = {}
    for u, row in prob.items():
        for v, p in row.items():
            if u == v or p <= 0:
                continue
            key = (u, v) if u < v else (v, u)
            pairs[key] = pairs.get(key, 0.0) + p / 2.0
    return pairs


def _reward_weights(mapped) -> dict[tuple[int, int], float]:
    sums: dict[tuple[int, int], list[float]] = {}
    for u, _, r, v in mapped:
        if u == v:
            continue
        key = (u, v) if u < v else (v, u)
        sums.setdefault(key, []).append(r)
    means = {k: math.fsum(rs) / len(rs) for k, rs in sums.items()}
    if not means:
        return {}
    lo, hi = min(means.values()), max(means.values())
    if hi - lo <= 0:
        return {k: 0.5 for k in means}
    floor = 2 * EDGE_WEIGHT_FLOOR
    return {k: floor + (1 - floor) * (m - lo) / (hi - lo) for k, m in means.items()}


def build_relation_graphs(
    t: EncodingTree,
    log: TrajectoryLog,
    labels: Sequence[str],
    levels: Sequence[int] | None = None,
) -> RelationGraphs:
    """Transition, action and reward graphs over the tree's nodes per level."""
    if not log.steps:
        raise InvalidInputError("trajectory log is empty")
    log.check_labels(labels)
    index = {lab: i for i, lab in enumerate(labels)}
    if len(index) != t.vertex_count:
        raise InvalidInputError("labels do not match the tree's vertices")
    if levels is None:
        levels = range(max(t.height, 1))
    graphs: dict[tuple[int, str], Graph] = {}
    members: dict[int, list[int]] = {}
    for h in levels:
        at = level_nodes(t, h)
        nodes = sorted(set(at.values()), key=lambda nid: min(t.nodes[nid].vertices))
        members[h] = nodes
        pos = {nid: i for i, nid in enumerate(nodes)}
        if h == 0:
            names = [labels[next(iter(t.nodes[nid].vertices))] for nid in nodes]
        else:
            names = [f"node{nid}" for nid in nodes]
        mapped = _map_steps(t, log, index, h)
        weights = {
            "transition": _symmetric(transition_probabilities(mapped)),
            "action": _symmetric(_action_probabilities(mapped)),
            "reward": _reward_weights(mapped),
        }
        for rel in RELATIONS:
            edges = [(pos[u], pos[v], w) for (u, v), w in sorted(weights[rel].items()) if w > 0]
            graphs[(h, rel)] = Graph(len(nodes), edges, names)
    return RelationGraphs(graphs, members)


# -- structural-information loss -------------------------------------------


def reconstructed_probabilities(g: Graph, t: EncodingTree) -> np.ndarray:
    """Row-normalized conditional entropies between every pair of leaves."""
    ent = {k: v.assigned_se for k, v in node_entropies(g, t).items()}
    up: dict[int, float] = {t.root: 0.0}
    for nid in reversed(t.bottom_up()):
        if nid != t.root:
            up[nid] = up[t.nodes[nid].parent] + ent[nid]
    n = g.vertex_count
    leaf = [t.leaf_of(v) for v in range(n)]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                out[i, j] = up[leaf[j]] - up[t.lca(leaf[i], leaf[j])]
    return _row_normalize(out)


def empirical_probabilities(g: Graph) -> np.ndarray:
    return _row_normalize(np.array(g.adjacency, dtype=float))


def _row_normalize(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    sums = m.sum(axis=1, keepdims=True)
    uniform = (1.0 - np.eye(n)) / max(n - 1, 1)
    return np.where(sums > 0, m / np.where(sums > 0, sums, 1.0), uniform)


def reconstruction_loss(reconstructed, empirical) -> float:
    """Mean squared error over off-diagonal entries."""
    r = np.asarray(reconstructed, dtype=float)
    e = np.asarray(empirical, dtype=float)
    if r.shape != e.shape or r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise InvalidInputError("probability matrices must be square and the same shape")
    n = r.shape[0]
    if n < 2:
        return 0.0
    off = ~np.eye(n, dtype=bool)
    return float(np.mean((r[off] - e[off]) ** 2))


@dataclass
class SiLossReport:
    parts: dict[tuple[int, str], float]
    trees: dict[tuple[int, str], EncodingTree | None]

    @property
    def total(self) -> float:
        return math.fsum(self.parts.values())

    def by_level(self) -> dict[int, dict[str, float]]:
        out: dict[int, dict[str, float]] = {}
        for (h, rel), val in sorted(self.parts.items()):
            out.setdefault(h, {})[rel] = val
        return out


def si_loss(
    relations: RelationGraphs,
    cfg: OptimizeConfig | None = None,
    levels: LevelRepresentations | None = None,
) -> SiLossReport:
    """Per (level, relation): optimize the relation graph's own tree,
    reconstruct pairwise probabilities from it and score them against the
    empirical relation weights."""
    cfg = cfg or OptimizeConfig()
    parts: dict[tuple[int, str], float] = {}
    trees: dict[tuple[int, str], EncodingTree | None] = {}
    for key in sorted(relations.graphs):
        g = relations.graphs[key]
        if levels is not None:
            missing = [m for m in relations.members[key[0]] if m not in levels.vectors]
            if missing:
                raise InvalidInputError(f"no representation for tree nodes {missing}")
        live = [v for v in range(g.vertex_count) if g.degrees[v] > 0]
        if len(live) < 2:
            parts[key], trees[key] = 0.0, None
            continue
        sub = g.subgraph(live)
        tree = optimize(sub, cfg)
        parts[key] = reconstruction_loss(
            reconstructed_probabilities(sub, tree), empirical_probabilities(sub)
        )
        trees[key] = tree
    return SiLossReport(parts, trees)


# -- discrete abstraction ---------------------------------------------------


def discrete_abstraction(t: EncodingTree, level: int) -> dict[int, int]:
    """Vertex -> dense cluster id of its node at the given cut level."""
    if not 1 <= level <= t.height - 1:
        raise DomainError(f"level {level} is not an interior cut of a height-{t.height} tree")
    ids: dict[int, int] = {}
    out = {}
    for v in range(t.vertex_count):
        node = t.cut_ancestor(v, level)
        out[v] = ids.setdefault(node, len(ids))
    return out


def root_partition(t: EncodingTree) -> dict[int, int]:
    """Vertex -> dense id of the root child that contains it."""
    ids: dict[int, int] = {}
    out = {}
    for v in range(t.vertex_count):
        node = t.leaf_of(v)
        while t.nodes[node].parent != t.root:
            node = t.nodes[node].parent
        out[v] = ids.setdefault(node, len(ids))
    return out
