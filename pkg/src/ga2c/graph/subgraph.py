"""K-order neighbourhood extraction."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from ga2c.graph.graph import AttackedGraph
from ga2c.graph.normalize import normalize_adjacency


@dataclass(frozen=True, eq=False)
class Subgraph:
    """Induced subgraph around a center node.

    Attributes:
        nodes: Sorted global ids; local id i maps to ``nodes[i]``.
        adjacency: Induced binary adjacency in local ids.
        features: Binary feature rows of ``nodes``.
        center: Local id of the center node.
    """

    nodes: np.ndarray
    adjacency: sp.csr_matrix
    features: sp.csr_matrix
    center: int

    @property
    def num_nodes(self) -> int:
        return int(self.nodes.size)

    @cached_property
    def normalized_adjacency(self) -> sp.csr_matrix:
        return normalize_adjacency(self.adjacency)

    def mean_features(self) -> np.ndarray:
        """Column means of the feature rows."""
        return np.asarray(self.features.mean(axis=0)).reshape(-1)


def khop_nodes(g: AttackedGraph, v: int, k: int) -> np.ndarray:
    """Sorted ids of all nodes within ``k`` hops of ``v`` (``v`` included)."""
    v = g.check_node(v)
    adj = g.adjacency
    reached = np.zeros(g.num_nodes, dtype=bool)
    reached[v] = True
    frontier = np.array([v], dtype=np.int64)
    for _ in range(k):
        if frontier.size == 0:
            break
        nbrs = np.unique(
            np.concatenate([adj.indices[adj.indptr[u] : adj.indptr[u + 1]] for u in frontier])
        ).astype(np.int64)
        frontier = nbrs[~reached[nbrs]]
        reached[frontier] = True
    return np.flatnonzero(reached).astype(np.int64)


def k_order_subgraph(g: AttackedGraph, v: int, k: int) -> Subgraph:
    """Induced subgraph on every node within ``k`` hops of ``v``.

    Raises:
        GraphIndexError: If ``v`` is not a node of ``g``.
    """
    nodes = khop_nodes(g, v, k)
    adjacency = sp.csr_matrix(g.adjacency[nodes][:, nodes])
    features = sp.csr_matrix(g.features[nodes])
    center = int(np.searchsorted(nodes, int(v)))
    return Subgraph(nodes=nodes, adjacency=adjacency, features=features, center=center)
