"""Structural-entropy encoding trees and hierarchical state abstraction."""

__version__ = "0.1.0"

from .graph import EmbeddingSet, Graph, degree, similarity_graph, volume  # noqa: E402
from .tree import EncodingTree  # noqa: E402
from .entropy import (  # noqa: E402
    assigned_entropy,
    conditional_entropy,
    node_entropies,
    one_dim_entropy,
    structural_probability,
    tree_entropy,
)
from .sparsify import SparsifyResult, knn_graph, sparsify  # noqa: E402
from .optimize import (  # noqa: E402
    DeltaSE,
    OptimizeConfig,
    brute_force_optimum,
    combine,
    init_flat_tree,
    merge,
    optimize,
)

__all__ = [
    "EmbeddingSet",
    "Graph",
    "EncodingTree",
    "DeltaSE",
    "OptimizeConfig",
    "SparsifyResult",
    "assigned_entropy",
    "brute_force_optimum",
    "combine",
    "conditional_entropy",
    "degree",
    "init_flat_tree",
    "knn_graph",
    "merge",
    "node_entropies",
    "one_dim_entropy",
    "optimize",
    "similarity_graph",
    "sparsify",
    "structural_probability",
    "tree_entropy",
    "volume",
]
