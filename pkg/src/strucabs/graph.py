"""Weighted undirected graphs and embedding sets."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InvalidInputError

# |cos| at or below this floor produces no edge
EDGE_WEIGHT_FLOOR = 1e-9


class Graph:
    """Immutable weighted undirected simple graph on dense 0-based vertices.

    Edges are stored once with ``u < v``. Degrees and the dense adjacency
    matrix are computed on demand and cached.
    """

    def __init__(
        self,
        vertex_count: int,
        edges: Iterable[tuple[int, int, float]] = (),
        vertex_labels: Sequence[str] | None = None,
    ):
        if vertex_count < 1:
            raise InvalidInputError("graph needs at least one vertex")
        if vertex_labels is None:
            vertex_labels = [str(i) for i in range(vertex_count)]
        vertex_labels = tuple(str(x) for x in vertex_labels)
        if len(vertex_labels) != vertex_count:
            raise InvalidInputError("label count does not match vertex count")
        if len(set(vertex_labels)) != vertex_count:
            raise InvalidInputError("vertex labels must be unique")

        store: dict[tuple[int, int], float] = {}
        for u, v, w in edges:
            u, v, w = int(u), int(v), float(w)
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise InvalidInputError(f"edge ({u}, {v}) references a missing vertex")
            if u == v:
                raise InvalidInputError(f"self-loop on vertex {u}")
            if not (math.isfinite(w) and w > 0):
                raise InvalidInputError(f"edge ({u}, {v}) has non-positive weight {w}")
            key = (u, v) if u < v else (v, u)
            if key in store:
                raise InvalidInputError(f"duplicate edge {key}")
            store[key] = w

        self.vertex_count = vertex_count
        self.vertex_labels = vertex_labels
        self._edges = dict(sorted(store.items()))

    # -- basic accounting -------------------------------------------------

    @property
    def edges(self) -> dict[tuple[int, int], float]:
        return dict(self._edges)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def weight(self, u: int, v: int) -> float:
        key = (u, v) if u < v else (v, u)
        return self._edges.get(key, 0.0)

    def edge_list(self) -> list[tuple[int, int, float]]:
        return [(u, v, w) for (u, v), w in self._edges.items()]

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.zeros(self.vertex_count)
        for (u, v), w in self._edges.items():
            d[u] += w
            d[v] += w
        d.flags.writeable = False
        return d

    def degree(self, v: int) -> float:
        if not 0 <= v < self.vertex_count:
            raise IndexError(f"vertex {v} out of range for {self.vertex_count} vertices")
        return float(self.degrees[v])

    @property
    def volume(self) -> float:
        return 2.0 * math.fsum(self._edges.values())

    @cached_property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.vertex_count, self.vertex_count))
        for (u, v), w in self._edges.items():
            a[u, v] = w
            a[v, u] = w
        a.flags.writeable = False
        return a

    @cached_property
    def neighbors(self) -> tuple[dict[int, float], ...]:
        nbrs: list[dict[int, float]] = [{} for _ in range(self.vertex_count)]
        for (u, v), w in self._edges.items():
            nbrs[u][v] = w
            nbrs[v][u] = w
        return tuple(nbrs)

    def index_of(self, label: str) -> int:
        try:
            return self._label_index[label]
        except KeyError:
            raise InvalidInputError(f"unknown vertex label {label!r}") from None

    @cached_property
    def _label_index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.vertex_labels)}

    # -- derived graphs ---------------------------------------------------

    def scaled(self, factor: float) -> "Graph":
        if not factor > 0:
            raise InvalidInputError("scale factor must be positive")
        return Graph(
            self.vertex_count,
            [(u, v, w * factor) for u, v, w in self.edge_list()],
            self.vertex_labels,
        )

    def subgraph(self, vertices: Sequence[int]) -> "Graph":
        """Induced subgraph; vertex ``vertices[i]`` becomes vertex ``i``."""
        index = {v: i for i, v in enumerate(vertices)}
        edges = [
            (index[u], index[v], w)
            for u, v, w in self.edge_list()
            if u in index and v in index
        ]
        return Graph(len(vertices), edges, [self.vertex_labels[v] for v in vertices])

    def components(self) -> list[list[int]]:
        """Connected components as sorted vertex lists, ordered by smallest member."""
        if self.edge_count == 0:
            return [[v] for v in range(self.vertex_count)]
        rows = [u for u, _ in self._edges]
        cols = [v for _, v in self._edges]
        mat = coo_matrix(
            (np.ones(len(rows)), (rows, cols)),
            shape=(self.vertex_count, self.vertex_count),
        )
        _, labels = connected_components(mat, directed=False)
        groups: dict[int, list[int]] = {}
        for v, lab in enumerate(labels):
            groups.setdefault(int(lab), []).append(v)
        return sorted(groups.values(), key=lambda c: c[0])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.vertex_count == other.vertex_count
            and self.vertex_labels == other.vertex_labels
            and self._edges == other._edges
        )

    def __hash__(self):
        return hash((self.vertex_count, self.vertex_labels, tuple(self._edges.items())))

    def __repr__(self):
        return f"Graph(n={self.vertex_count}, m={self.edge_count}, vol={self.volume:.6g})"


def degree(g: Graph, v: int) -> float:
    return g.degree(v)


def volume(g: Graph) -> float:
    return g.volume


@dataclass(frozen=True)
class EmbeddingSet:
    """Per-state real vectors with their state labels."""

    vectors: np.ndarray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        vecs = np.array(self.vectors, dtype=float)
        if vecs.ndim != 2 or vecs.shape[0] < 1 or vecs.shape[1] < 1:
            raise InvalidInputError("embeddings must be a non-empty 2-D matrix")
        if not np.all(np.isfinite(vecs)):
            raise InvalidInputError("embeddings contain non-finite entries")
        labels = tuple(str(x) for x in self.labels) or tuple(
            str(i) for i in range(vecs.shape[0])
        )
        if len(labels) != vecs.shape[0]:
            raise InvalidInputError("label count does not match embedding rows")
        if len(set(labels)) != len(labels):
            raise InvalidInputError("embedding labels must be unique")
        zero = np.flatnonzero(~np.any(vecs != 0.0, axis=1))
        if zero.size:
            raise InvalidInputError(
                f"zero-norm embedding for state {labels[zero[0]]!r}"
            )
        vecs.flags.writeable = False
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "labels", labels)

    @property
    def count(self) -> int:
        return self.vectors.shape[0]

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]


def similarity_graph(e: EmbeddingSet, floor: float = EDGE_WEIGHT_FLOOR) -> Graph:
    """Complete graph weighted by absolute cosine similarity.

    Pairs with ``|cos| <= floor`` get no edge.
    """
    if e.count < 2:
        raise InvalidInputError("similarity graph needs at least two embeddings")
    norms = np.linalg.norm(e.vectors, axis=1)
    unit = e.vectors / norms[:, None]
    cos = np.clip(np.abs(unit @ unit.T), 0.0, 1.0)
    iu, ju = np.triu_indices(e.count, k=1)
    w = cos[iu, ju]
    keep = w > floor
    return Graph(
        e.count,
        zip(iu[keep].tolist(), ju[keep].tolist(), w[keep].tolist()),
        e.labels,
    )
