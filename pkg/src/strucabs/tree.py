"""Encoding trees: rooted hierarchies of nested vertex subsets."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import DomainError, InvalidInputError


@dataclass
class TreeNode:
    id: int
    parent: int | None
    children: list[int] = field(default_factory=list)
    vertices: frozenset[int] = frozenset()
    height: int = 0

    @property
    def is_leaf(self) -> bool:
        return not self.children


class EncodingTree:
    """Rooted tree over graph vertices.

    The root covers every vertex, each internal node's children partition
    its vertex set, and every leaf holds exactly one vertex. Node ids are
    arbitrary non-negative ints; trees built here use the vertex index as
    the leaf id and ``vertex_count`` for the root.
    """

    def __init__(self, nodes: dict[int, TreeNode], root: int):
        self.nodes = nodes
        self.root = root
        self._leaf_of = {
            next(iter(n.vertices)): n.id for n in nodes.values() if n.is_leaf and n.vertices
        }

    @classmethod
    def flat(cls, vertex_count: int) -> "EncodingTree":
        root_id = vertex_count
        nodes = {
            v: TreeNode(v, root_id, [], frozenset([v]), 0) for v in range(vertex_count)
        }
        nodes[root_id] = TreeNode(
            root_id, None, list(range(vertex_count)), frozenset(range(vertex_count)), 1
        )
        return cls(nodes, root_id)

    @classmethod
    def from_partition(
        cls, vertex_count: int, blocks: Sequence[Sequence]
    ) -> "EncodingTree":
        """Build a tree from nested lists of vertex indices.

        ``[[0, 1], [2, [3, 4]]]`` gives root -> {0,1}, {2,3,4}; the second
        block holds leaf 2 and a sub-cluster {3,4}. Bare ints are leaves.
        """
        nodes: dict[int, TreeNode] = {
            v: TreeNode(v, None, [], frozenset([v]), 0) for v in range(vertex_count)
        }
        next_id = vertex_count + 1

        def build(spec, parent_id):
            nonlocal next_id
            if isinstance(spec, int):
                nodes[spec].parent = parent_id
                return spec
            node_id = next_id
            next_id += 1
            node = TreeNode(node_id, parent_id)
            nodes[node_id] = node
            node.children = [build(s, node_id) for s in spec]
            node.vertices = frozenset().union(*(nodes[c].vertices for c in node.children))
            node.height = 1 + max(nodes[c].height for c in node.children)
            return node_id

        root_id = vertex_count
        root = TreeNode(root_id, None)
        nodes[root_id] = root
        root.children = [build(b, root_id) for b in blocks]
        root.vertices = frozenset().union(*(nodes[c].vertices for c in root.children))
        root.height = 1 + max(nodes[c].height for c in root.children)
        tree = cls(nodes, root_id)
        tree.validate(vertex_count)
        return tree

    # -- navigation -------------------------------------------------------

    def __getitem__(self, node_id: int) -> TreeNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise DomainError(f"no node with id {node_id}") from None

    def __contains__(self, node_id) -> bool:
        return node_id in self.nodes

    @property
    def height(self) -> int:
        return self.nodes[self.root].height

    @property
    def vertex_count(self) -> int:
        return len(self.nodes[self.root].vertices)

    def leaf_of(self, vertex: int) -> int:
        try:
            return self._leaf_of[vertex]
        except KeyError:
            raise DomainError(f"vertex {vertex} has no leaf") from None

    def leaves(self) -> list[int]:
        return [self._leaf_of[v] for v in sorted(self._leaf_of)]

    def is_leaf(self, node_id: int) -> bool:
        return self[node_id].is_leaf

    def ancestors(self, node_id: int) -> Iterator[int]:
        """Yield ``node_id`` and every ancestor up to the root."""
        cur: int | None = node_id
        while cur is not None:
            yield cur
            cur = self.nodes[cur].parent

    def depth(self, node_id: int) -> int:
        return sum(1 for _ in self.ancestors(node_id)) - 1

    def lca(self, a: int, b: int) -> int:
        seen = set(self.ancestors(a))
        for x in self.ancestors(b):
            if x in seen:
                return x
        raise InvalidInputError("nodes do not share a root")

    def siblings(self, a: int, b: int) -> bool:
        pa, pb = self[a].parent, self[b].parent
        return a != b and pa is not None and pa == pb

    def internal_nodes(self) -> list[int]:
        return sorted(i for i, n in self.nodes.items() if n.children)

    def bottom_up(self) -> list[int]:
        """Node ids ordered so that every child precedes its parent."""
        order: list[int] = []
        stack = [(self.root, False)]
        while stack:
            nid, done = stack.pop()
            if done:
                order.append(nid)
                continue
            stack.append((nid, True))
            for c in reversed(self.nodes[nid].children):
                stack.append((c, False))
        return order

    def cut_ancestor(self, vertex: int, level: int) -> int:
        """Highest non-root ancestor of ``vertex``'s leaf whose height is <= level."""
        node = self.leaf_of(vertex)
        while True:
            parent = self.nodes[node].parent
            if parent is None or parent == self.root or self.nodes[parent].height > level:
                return node
            node = parent

    def copy(self) -> "EncodingTree":
        return EncodingTree(copy.deepcopy(self.nodes), self.root)

    def refresh_heights(self, start: int) -> None:
        cur: int | None = start
        while cur is not None:
            node = self.nodes[cur]
            node.height = 1 + max(self.nodes[c].height for c in node.children) if node.children else 0
            cur = node.parent

    def structure(self, node_id: int | None = None):
        """Nested, order-insensitive view used to compare trees."""
        node = self[self.root if node_id is None else node_id]
        if node.is_leaf:
            return next(iter(node.vertices))
        return frozenset(self.structure(c) for c in node.children)

    # -- validation -------------------------------------------------------

    def validate(self, vertex_count: int | None = None, k_cap: int | None = None) -> None:
        nodes = self.nodes
        if self.root not in nodes or nodes[self.root].parent is not None:
            raise InvalidInputError("root missing or has a parent")
        if vertex_count is not None and nodes[self.root].vertices != frozenset(range(vertex_count)):
            raise InvalidInputError("root does not cover every vertex")
        reached = set()
        for nid in self.bottom_up():
            reached.add(nid)
            node = nodes[nid]
            if node.is_leaf:
                if len(node.vertices) != 1:
                    raise InvalidInputError(f"leaf {nid} is not a singleton")
                if node.height != 0:
                    raise InvalidInputError(f"leaf {nid} has height {node.height}")
                continue
            union: set[int] = set()
            total = 0
            for c in node.children:
                if nodes[c].parent != nid:
                    raise InvalidInputError(f"child {c} does not point back to {nid}")
                union |= nodes[c].vertices
                total += len(nodes[c].vertices)
            if total != len(union):
                raise InvalidInputError(f"children of {nid} overlap")
            if union != node.vertices:
                raise InvalidInputError(f"children of {nid} do not cover it")
            if node.height != 1 + max(nodes[c].height for c in node.children):
                raise InvalidInputError(f"node {nid} has a stale height")
        if reached != set(nodes):
            raise InvalidInputError("tree has unreachable nodes")
        if k_cap is not None and self.height > k_cap:
            raise InvalidInputError(f"tree height {self.height} exceeds cap {k_cap}")

    # -- serialization ----------------------------------------------------

    def to_dict(self, labels: Sequence[str] | None = None) -> dict:
        def lab(v):
            return labels[v] if labels is not None else str(v)

        return {
            "root": self.root,
            "nodes": [
                {
                    "id": n.id,
                    "parent": n.parent,
                    "children": list(n.children),
                    "vertices": [lab(v) for v in sorted(n.vertices)],
                    "height": n.height,
                }
                for n in sorted(self.nodes.values(), key=lambda n: n.id)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict, labels: Sequence[str] | None = None) -> "EncodingTree":
        index = {lab: i for i, lab in enumerate(labels)} if labels is not None else None
        try:
            nodes = {}
            for rec in data["nodes"]:
                verts = rec["vertices"]
                verts = [index[v] for v in verts] if index is not None else [int(v) for v in verts]
                node = TreeNode(
                    int(rec["id"]),
                    None if rec["parent"] is None else int(rec["parent"]),
                    [int(c) for c in rec["children"]],
                    frozenset(verts),
                    int(rec["height"]),
                )
                nodes[node.id] = node
            tree = cls(nodes, int(data["root"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed encoding tree: {exc}") from None
        tree.validate(len(labels) if labels is not None else None)
        return tree
