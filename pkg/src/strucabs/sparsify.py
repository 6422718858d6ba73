"""k-NN sparsification with k chosen by one-dimensional entropy."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .entropy import one_dim_entropy
from .errors import DomainError, InvalidInputError
from .graph import Graph

K_MAX_CAP = 32
# curve values this close count as a tie
TIE_TOL = 1e-12


@dataclass(frozen=True)
class SparsifyResult:
    k_star: int
    graph: Graph
    entropy_curve: list[tuple[int, float]]


def _ranked_neighbors(g: Graph) -> list[list[int]]:
    # weight descending, then smaller neighbour index
    return [
        [v for v, _ in sorted(nbrs.items(), key=lambda kv: (-kv[1], kv[0]))]
        for nbrs in g.neighbors
    ]


def _knn_from_ranking(g: Graph, ranking: list[list[int]], k: int) -> Graph:
    keep: set[tuple[int, int]] = set()
    for u, order in enumerate(ranking):
        for v in order[:k]:
            keep.add((u, v) if u < v else (v, u))
    edges = g.edges
    return Graph(
        g.vertex_count,
        [(u, v, edges[(u, v)]) for u, v in sorted(keep)],
        g.vertex_labels,
    )


def knn_graph(g: Graph, k: int) -> Graph:
    """Keep an edge when it is among the k heaviest of either endpoint."""
    if not 1 <= k <= g.vertex_count - 1:
        raise DomainError(f"k={k} outside [1, {g.vertex_count - 1}]")
    return _knn_from_ranking(g, _ranked_neighbors(g), k)


def sparsify(g: Graph, k_max: int | None = None) -> SparsifyResult:
    """Sweep k and keep the k-NN graph of minimum one-dimensional entropy.

    Candidates that leave a vertex isolated are skipped. Ties go to the
    smallest k.
    """
    n = g.vertex_count
    if n < 2:
        raise InvalidInputError("sparsification needs at least two vertices")
    if k_max is None:
        k_max = min(n - 1, K_MAX_CAP)
    ranking = _ranked_neighbors(g)
    curve: list[tuple[int, float]] = []
    best: tuple[float, int, Graph] | None = None
    for k in range(1, k_max + 1):
        gk = _knn_from_ranking(g, ranking, k)
        if np.any(np.asarray(gk.degrees) <= 0):
            continue
        h = one_dim_entropy(gk)
        curve.append((k, h))
        if best is None or h < best[0] - TIE_TOL:
            best = (h, k, gk)
    if best is None:
        raise InvalidInputError("every candidate k leaves an isolated vertex")
    return SparsifyResult(best[1], best[2], curve)
