"""Greedy encoding-tree optimization with merge and combine operators.

The loop mirrors the classic two-phase greedy: scan every sibling pair for
the best merge and apply it if it lowers the tree entropy; otherwise scan for
the best combine under the height cap; stop when neither helps.

Operator semantics, for siblings ``b1`` and ``b2`` under parent ``p``:

* merge   -- replace both by one node whose children are the children of
             ``b1`` followed by those of ``b2``. A leaf operand contributes
             itself as a child, so a vertex can join an existing cluster.
             Two leaves cannot be merged (use combine).
* combine -- insert a new node under ``p`` whose only children are ``b1``
             and ``b2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np

from .entropy import tree_entropy
from .errors import DomainError, HeightCapError, InvalidInputError, OptimizerError
from .graph import Graph
from .tree import EncodingTree, TreeNode

DEFAULT_K = 3
GAIN_TOL = 1e-12
TIE_TOL = 1e-12
BRUTE_FORCE_MAX_VERTICES = 8


@dataclass(frozen=True)
class OptimizeConfig:
    k_cap: int = DEFAULT_K
    max_iterations: int | None = None

    def __post_init__(self):
        if self.k_cap < 2:
            raise InvalidInputError("k_cap must be at least 2")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be positive")


@dataclass(frozen=True)
class DeltaSE:
    """One applied operator; ``delta`` > 0 means the entropy went down."""

    kind: Literal["merge", "combine"]
    beta1: int
    beta2: int
    delta: float
    new_node: int
    entropy_before: float
    entropy_after: float


def init_flat_tree(g: Graph) -> EncodingTree:
    return EncodingTree.flat(g.vertex_count)


# -- structural operators ---------------------------------------------------


def _check_siblings(t: EncodingTree, b1: int, b2: int) -> int:
    t[b1], t[b2]
    if not t.siblings(b1, b2):
        raise DomainError(f"nodes {b1} and {b2} are not siblings")
    return t[b1].parent


def _replace_pair(t: EncodingTree, parent: int, b1: int, b2: int, new_id: int) -> None:
    kids = t.nodes[parent].children
    i1, i2 = kids.index(b1), kids.index(b2)
    at = min(i1, i2)
    kids[at] = new_id
    kids.remove(b1 if i1 > i2 else b2)


def _merge_inplace(t: EncodingTree, b1: int, b2: int, new_id: int) -> None:
    parent = _check_siblings(t, b1, b2)
    n1, n2 = t.nodes[b1], t.nodes[b2]
    if n1.is_leaf and n2.is_leaf:
        raise DomainError("cannot merge two leaves; combine them instead")
    children = []
    for node in (n1, n2):
        children.extend(node.children if node.children else [node.id])
    merged = TreeNode(new_id, parent, children, n1.vertices | n2.vertices, 0)
    t.nodes[new_id] = merged
    for c in children:
        t.nodes[c].parent = new_id
    _replace_pair(t, parent, b1, b2, new_id)
    for node in (n1, n2):
        if node.children:
            del t.nodes[node.id]
    t.refresh_heights(new_id)


def _combine_inplace(t: EncodingTree, b1: int, b2: int, new_id: int, k_cap: int | None) -> None:
    parent = _check_siblings(t, b1, b2)
    n1, n2 = t.nodes[b1], t.nodes[b2]
    if k_cap is not None and t.depth(parent) + max(n1.height, n2.height) + 2 > k_cap:
        raise HeightCapError(f"combining {b1} and {b2} would exceed height {k_cap}")
    kids = t.nodes[parent].children
    first, second = (b1, b2) if kids.index(b1) < kids.index(b2) else (b2, b1)
    node = TreeNode(new_id, parent, [first, second], n1.vertices | n2.vertices, 0)
    t.nodes[new_id] = node
    n1.parent = n2.parent = new_id
    _replace_pair(t, parent, b1, b2, new_id)
    t.refresh_heights(new_id)


def _fresh_id(t: EncodingTree) -> int:
    return max(t.nodes) + 1


def merge(t: EncodingTree, b1: int, b2: int) -> EncodingTree:
    out = t.copy()
    _merge_inplace(out, b1, b2, _fresh_id(out))
    return out


def combine(t: EncodingTree, b1: int, b2: int, k_cap: int | None = None) -> EncodingTree:
    out = t.copy()
    _combine_inplace(out, b1, b2, _fresh_id(out), k_cap)
    return out


# -- greedy optimizer -------------------------------------------------------


@lru_cache(maxsize=256)
def _upper_pairs(m: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(m, k=1)


class _Greedy:
    def __init__(self, g: Graph, tree: EncodingTree, k_cap: int):
        self.g = g
        self.t = tree
        self.k_cap = k_cap
        self.adj = np.asarray(g.adjacency)
        self.deg = np.asarray(g.degrees)
        self.vol_g = float(self.deg.sum())
        self.vol: dict[int, float] = {}
        self.cut: dict[int, float] = {}
        self._blocks: dict[int, tuple] = {}
        for nid in tree.nodes:
            self._measure(nid)

    def _measure(self, nid: int) -> None:
        verts = np.fromiter(self.t.nodes[nid].vertices, dtype=int)
        self.vol[nid] = float(self.deg[verts].sum())
        outside = np.ones(self.g.vertex_count, dtype=bool)
        outside[verts] = False
        self.cut[nid] = float(self.adj[verts][:, outside].sum())

    def entropy(self) -> float:
        total = 0.0
        for nid, node in self.t.nodes.items():
            if node.parent is not None and self.cut[nid] > 0:
                total -= self.cut[nid] / self.vol_g * math.log2(self.vol[nid] / self.vol[node.parent])
        return total

    def _pair_block(self, parent: int):
        t = self.t
        kids = t.nodes[parent].children
        verts = np.array(sorted(t.nodes[parent].vertices))
        pos = np.full(self.g.vertex_count, -1)
        pos[verts] = np.arange(len(verts))
        member = np.zeros((len(verts), len(kids)))
        for k, c in enumerate(kids):
            member[pos[list(t.nodes[c].vertices)], k] = 1.0
        sub = self.adj[np.ix_(verts, verts)]
        cross = member.T @ sub @ member
        ids = np.array(kids)
        v = np.array([self.vol[c] for c in kids])
        gcut = np.array([self.cut[c] for c in kids])
        leaf = np.array([t.nodes[c].is_leaf for c in kids])
        child_cut = np.array(
            [sum(self.cut[x] for x in t.nodes[c].children) if t.nodes[c].children else self.cut[c] for c in kids]
        )
        h = np.array([t.nodes[c].height for c in kids])
        iu, ju = _upper_pairs(len(kids))
        return ids, v, gcut, child_cut, leaf, h, cross, iu, ju

    def _scan(self, kind: str):
        t = self.t
        vg = self.vol_g
        deltas, first, second = [], [], []
        for parent in t.internal_nodes():
            kids = t.nodes[parent].children
            if len(kids) < 2:
                continue
            if kind == "combine" and len(kids) == 2:
                continue  # new node would equal the parent: zero gain
            if kind == "merge" and all(t.nodes[c].is_leaf for c in kids):
                continue
            if parent not in self._blocks:
                self._blocks[parent] = self._pair_block(parent)
            ids, v, gcut, child_cut, leaf, h, cross, iu, ju = self._blocks[parent]
            vp = self.vol[parent]
            c = cross[iu, ju]
            vb = v[iu] + v[ju]
            if kind == "combine":
                ok = t.depth(parent) + np.maximum(h[iu], h[ju]) + 2 <= self.k_cap
                d = 2.0 * c / vg * np.log2(vp / vb)
            else:
                ok = ~(leaf[iu] & leaf[ju])
                gb = np.maximum(gcut[iu] + gcut[ju] - 2.0 * c, 0.0)
                d = (
                    gcut[iu] * np.log2(vp / v[iu])
                    + gcut[ju] * np.log2(vp / v[ju])
                    - child_cut[iu] * np.log2(vb / v[iu])
                    - child_cut[ju] * np.log2(vb / v[ju])
                    - gb * np.log2(vp / vb)
                ) / vg
            if not ok.any():
                continue
            a, b = ids[iu][ok], ids[ju][ok]
            deltas.append(d[ok])
            first.append(np.minimum(a, b))
            second.append(np.maximum(a, b))
        if not deltas:
            return None
        deltas = np.concatenate(deltas)
        first = np.concatenate(first)
        second = np.concatenate(second)
        best = deltas.max()
        if not best > GAIN_TOL:
            return None
        tied = np.flatnonzero(deltas >= best - TIE_TOL)
        pick = tied[np.lexsort((second[tied], first[tied]))[0]]
        return float(deltas[pick]), int(first[pick]), int(second[pick])

    def _apply(self, kind: str, b1: int, b2: int) -> int:
        new_id = _fresh_id(self.t)
        if kind == "merge":
            dropped = [x for x in (b1, b2) if not self.t.nodes[x].is_leaf]
            _merge_inplace(self.t, b1, b2, new_id)
            for x in dropped:
                self.vol.pop(x)
                self.cut.pop(x)
        else:
            _combine_inplace(self.t, b1, b2, new_id, self.k_cap)
        self._measure(new_id)
        # cached pair blocks are stale wherever heights or child lists moved
        for a in self.t.ancestors(new_id):
            self._blocks.pop(a, None)
        return new_id

    def run(self, max_iterations: int, trace: list | None, verify: bool) -> EncodingTree:
        current = tree_entropy(self.g, self.t) if verify else self.entropy()
        for _ in range(max_iterations):
            step = None
            for kind in ("merge", "combine"):
                found = self._scan(kind)
                if found is not None:
                    step = (kind, *found)
                    break
            if step is None:
                return self.t
            kind, delta, b1, b2 = step
            new_id = self._apply(kind, b1, b2)
            after = current - delta
            if verify:
                actual = tree_entropy(self.g, self.t)
                if abs(actual - after) > 1e-9:
                    raise OptimizerError(
                        f"incremental delta disagrees with recomputation: {after} vs {actual}"
                    )
                if not actual < current - GAIN_TOL:
                    raise OptimizerError(f"{kind} on ({b1}, {b2}) did not lower the entropy")
                after = actual
            if trace is not None:
                trace.append(DeltaSE(kind, b1, b2, delta, new_id, current, after))
            current = after
        raise OptimizerError(f"no convergence within {max_iterations} iterations")


def _start_tree(g: Graph) -> EncodingTree:
    comps = g.components()
    if len(comps) == 1:
        return EncodingTree.flat(g.vertex_count)
    return EncodingTree.from_partition(
        g.vertex_count, [c if len(c) > 1 else c[0] for c in comps]
    )


def optimize(
    g: Graph,
    cfg: OptimizeConfig | None = None,
    trace: list | None = None,
    verify: bool = False,
) -> EncodingTree:
    """Greedy merge/combine minimization of the tree entropy.

    A disconnected graph starts with one root child per connected component.
    Applied operators are appended to ``trace`` when given. With ``verify``
    each step is checked against a full entropy recomputation.
    """
    cfg = cfg or OptimizeConfig()
    n = g.vertex_count
    if n == 1:
        return EncodingTree.flat(1)
    if np.any(np.asarray(g.degrees) <= 0):
        raise InvalidInputError("every vertex needs positive degree before optimization")
    limit = cfg.max_iterations or 10 * n * n
    tree = _Greedy(g, _start_tree(g), cfg.k_cap).run(limit, trace, verify)
    tree.validate(n, cfg.k_cap)
    return tree


# -- exhaustive oracle ------------------------------------------------------


def brute_force_optimum(g: Graph, k_cap: int) -> tuple[EncodingTree, float]:
    """Exact minimum tree entropy over all encoding trees of height <= k_cap.

    Every node's vertex set is split into all set partitions (at least two
    blocks), recursing until the height budget is spent. Chains of
    single-child nodes are skipped; they never change the entropy.
    """
    n = g.vertex_count
    if n > BRUTE_FORCE_MAX_VERTICES:
        raise DomainError(f"brute force is limited to {BRUTE_FORCE_MAX_VERTICES} vertices")
    if k_cap < 1:
        raise DomainError("k_cap must be at least 1")
    if n == 1:
        return EncodingTree.flat(1), 0.0

    adj = [[g.weight(u, v) for v in range(n)] for u in range(n)]
    deg = [sum(row) for row in adj]
    total = sum(deg)
    if total <= 0:
        raise InvalidInputError("graph has zero volume")
    full = (1 << n) - 1

    # volume and cut of every vertex subset, indexed by bitmask
    vol = [0.0] * (full + 1)
    cut = [0.0] * (full + 1)
    for mask in range(1, full + 1):
        inside = [v for v in range(n) if mask >> v & 1]
        vol[mask] = math.fsum(deg[v] for v in inside)
        cut[mask] = math.fsum(adj[u][v] for u in inside for v in range(n) if not mask >> v & 1)

    @lru_cache(maxsize=None)
    def term(mask, parent_mask):
        c, vm = cut[mask], vol[mask]
        if c <= 0 or vm <= 0:
            return 0.0
        return -(c / total) * math.log2(vm / vol[parent_mask])

    @lru_cache(maxsize=None)
    def best_node(mask, budget):
        # mask has >= 2 vertices; children must form a partition with >= 2 blocks
        return best_blocks(mask, mask, budget, True)

    @lru_cache(maxsize=None)
    def best_blocks(rest, parent_mask, budget, first):
        if rest == 0:
            return 0.0, ()
        low = rest & -rest
        others = rest ^ low
        best = (math.inf, ())
        # enumerate the block holding the lowest remaining vertex
        sub = others
        while True:
            block = sub | low
            if not (first and block == parent_mask):
                if block == low:
                    cost, shape = term(block, parent_mask), (low.bit_length() - 1,)
                elif budget >= 2:
                    inner, inner_shape = best_node(block, budget - 1)
                    cost, shape = term(block, parent_mask) + inner, (inner_shape,)
                else:
                    cost = math.inf
                if cost < math.inf:
                    tail, tail_shape = best_blocks(rest ^ block, parent_mask, budget, False)
                    if cost + tail < best[0]:
                        best = (cost + tail, shape + tail_shape)
            if sub == 0:
                break
            sub = (sub - 1) & others
        return best

    value, shape = best_node(full, k_cap)

    def as_lists(s):
        return s if isinstance(s, int) else [as_lists(x) for x in s]

    blocks = [as_lists(s) for s in shape]
    return EncodingTree.from_partition(n, blocks), value

