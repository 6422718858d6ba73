"""Embeddings -> sparse state graph -> encoding tree -> abstraction report."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .abstraction import (
    ClusterModel,
    LevelRepresentations,
    SiLossReport,
    TrajectoryLog,
    aggregate,
    build_relation_graphs,
    cluster_model,
    root_partition,
    si_loss,
)
from .entropy import one_dim_entropy, tree_entropy
from .graph import EmbeddingSet, Graph, similarity_graph
from .optimize import DeltaSE, OptimizeConfig, optimize
from .sparsify import SparsifyResult, sparsify
from .tree import EncodingTree


@dataclass
class AbstractionReport:
    labels: tuple[str, ...]
    sparse: SparsifyResult
    tree: EncodingTree
    trace: list[DeltaSE]
    clusters: ClusterModel
    levels: LevelRepresentations
    assignment: dict[int, int]
    si: SiLossReport | None = None
    extra: dict = field(default_factory=dict)

    @property
    def sparse_graph(self) -> Graph:
        return self.sparse.graph

    @property
    def initial_entropy(self) -> float:
        return one_dim_entropy(self.sparse.graph)

    @property
    def final_entropy(self) -> float:
        return tree_entropy(self.sparse.graph, self.tree)

    def to_dict(self) -> dict:
        from .io import fmt

        centers = {
            str(cid): [fmt(x) for x in vec]
            for cid, vec in zip(self.clusters.center_ids, self.clusters.centers)
        }
        out = {
            "k_star": self.sparse.k_star,
            "entropy_curve": [{"k": k, "entropy": fmt(h)} for k, h in self.sparse.entropy_curve],
            "initial_entropy": fmt(self.initial_entropy),
            "final_entropy": fmt(self.final_entropy),
            "tree_height": self.tree.height,
            "operators": len(self.trace),
            "cluster_count": len(set(self.assignment.values())),
            "assignments": {self.labels[v]: c for v, c in sorted(self.assignment.items())},
            "centers": centers,
            "clustering_loss": fmt(self.clusters.loss),
        }
        if self.si is not None:
            out["si_loss"] = {
                "levels": {
                    str(h): {rel: fmt(v) for rel, v in parts.items()}
                    for h, parts in self.si.by_level().items()
                },
                "total": fmt(self.si.total),
            }
        out.update(self.extra)
        return out


def abstract_states(
    e: EmbeddingSet,
    log: TrajectoryLog | None = None,
    cfg: OptimizeConfig | None = None,
) -> AbstractionReport:
    cfg = cfg or OptimizeConfig()
    full = similarity_graph(e)
    sparse = sparsify(full)
    trace: list[DeltaSE] = []
    tree = optimize(sparse.graph, cfg, trace=trace)
    model = cluster_model(sparse.graph, tree, e)
    levels = aggregate(tree, sparse.graph, e)
    si = None
    if log is not None:
        relations = build_relation_graphs(tree, log, e.labels)
        si = si_loss(relations, cfg, levels)
    return AbstractionReport(
        e.labels, sparse, tree, trace, model, levels, root_partition(tree), si
    )


def cluster_array(report: AbstractionReport) -> np.ndarray:
    return np.array([report.assignment[v] for v in range(len(report.labels))])
