"""Clean graphs and persistent injection overlays."""

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from ga2c.graph.normalize import normalize_adjacency
from ga2c.utils.errors import (
    ConstraintError,
    FeatureValidationError,
    GraphIndexError,
)

SPLIT_NAMES = ("train", "val", "test")


def _binary_csr(rows: Sequence[Iterable[int]], num_cols: int) -> sp.csr_matrix:
    indptr = [0]
    indices: list[int] = []
    for row in rows:
        active = sorted(set(int(i) for i in row))
        indices.extend(active)
        indptr.append(len(indices))
    data = np.ones(len(indices), dtype=np.float64)
    return sp.csr_matrix(
        (data, np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(rows), num_cols),
    )


def _symmetric_adjacency(num_nodes: int, edges: np.ndarray) -> sp.csr_matrix:
    if edges.size == 0:
        return sp.csr_matrix((num_nodes, num_nodes), dtype=np.float64)
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    adj = sp.csr_matrix(
        (np.ones(rows.size, dtype=np.float64), (rows, cols)), shape=(num_nodes, num_nodes)
    )
    adj.sum_duplicates()
    adj.data[:] = 1.0
    adj.sort_indices()
    return adj


@dataclass(frozen=True, eq=False)
class Graph:
    """An undirected graph with binary node features, labels and splits.

    Attributes:
        adjacency: N×N binary symmetric CSR matrix without self-loops.
        features: N×F binary CSR matrix; each row holds the sorted active indices.
        labels: Class id per node, or None for unlabeled graphs.
        splits: Node id arrays for "train", "val" and "test" (possibly empty).
        num_classes: Number of classes C.
        name: Dataset name used in logs and reports.
    """

    adjacency: sp.csr_matrix
    features: sp.csr_matrix
    labels: np.ndarray | None
    splits: Mapping[str, np.ndarray]
    num_classes: int
    name: str = "graph"

    def __post_init__(self) -> None:
        n = self.adjacency.shape[0]
        if self.adjacency.shape != (n, n):
            raise FeatureValidationError(f"adjacency must be square, got {self.adjacency.shape}")
        if self.features.shape[0] != n:
            raise FeatureValidationError(
                f"feature matrix has {self.features.shape[0]} rows for {n} nodes"
            )
        if self.adjacency.diagonal().any():
            raise FeatureValidationError("adjacency must not contain self-loops")
        if (self.adjacency != self.adjacency.T).nnz:
            raise FeatureValidationError("adjacency must be symmetric")
        if np.any(self.adjacency.data != 1.0):
            raise FeatureValidationError("adjacency must be binary")
        if np.any(self.features.data != 1.0):
            raise FeatureValidationError("features must be binary")
        if self.labels is not None:
            if self.labels.shape != (n,):
                raise FeatureValidationError(f"labels must have shape ({n},)")
            if np.any((self.labels < 0) | (self.labels >= self.num_classes)):
                raise FeatureValidationError(f"labels must lie in [0, {self.num_classes})")
        seen: set[int] = set()
        for split in SPLIT_NAMES:
            ids = self.splits.get(split, np.empty(0, dtype=np.int64))
            if ids.size and (ids.min() < 0 or ids.max() >= n):
                raise FeatureValidationError(f"split {split!r} references nodes outside [0, {n})")
            overlap = seen.intersection(ids.tolist())
            if overlap:
                raise FeatureValidationError(
                    f"split {split!r} overlaps an earlier split at {len(overlap)} nodes"
                )
            seen.update(ids.tolist())

        if self.labels is not None:
            self.labels.flags.writeable = False
        for ids in self.splits.values():
            ids.flags.writeable = False

    @classmethod
    def from_lists(
        cls,
        num_nodes: int,
        edges: Iterable[tuple[int, int]],
        features: Sequence[Iterable[int]],
        num_features: int,
        labels: Sequence[int] | None,
        splits: Mapping[str, Sequence[int]] | None,
        num_classes: int,
        name: str = "graph",
    ) -> "Graph":
        """Build a graph from an edge list and per-node active feature indices.

        Duplicate and reversed edges collapse into one undirected edge.

        Raises:
            FeatureValidationError: On self-loops, out-of-range node ids or
                feature indices, or a feature list per node count mismatch.
        """
        edge_array = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if edge_array.size:
            if edge_array.min() < 0 or edge_array.max() >= num_nodes:
                raise FeatureValidationError(f"edge endpoint outside [0, {num_nodes})")
            if np.any(edge_array[:, 0] == edge_array[:, 1]):
                raise FeatureValidationError("edge list contains a self-loop")
        if len(features) != num_nodes:
            raise FeatureValidationError(f"{len(features)} feature rows for {num_nodes} nodes")
        rows = [list(row) for row in features]
        if any(i < 0 or i >= num_features for row in rows for i in row):
            raise FeatureValidationError(f"feature index outside [0, {num_features})")
        feature_matrix = _binary_csr(rows, num_features)
        return cls(
            adjacency=_symmetric_adjacency(num_nodes, edge_array),
            features=feature_matrix,
            labels=None if labels is None else np.asarray(labels, dtype=np.int64),
            splits={
                split: np.asarray((splits or {}).get(split, []), dtype=np.int64)
                for split in SPLIT_NAMES
            },
            num_classes=num_classes,
            name=name,
        )

    @property
    def num_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    @property
    def num_edges(self) -> int:
        return self.adjacency.nnz // 2

    def has_splits(self) -> bool:
        return all(self.splits.get(s) is not None and self.splits[s].size for s in SPLIT_NAMES)

    def edge_list(self) -> np.ndarray:
        """Undirected edges as an (E, 2) array with u < v, sorted."""
        upper = sp.triu(self.adjacency, k=1).tocoo()
        edges = np.stack([upper.row, upper.col], axis=1).astype(np.int64)
        order = np.lexsort((edges[:, 1], edges[:, 0]))
        return edges[order]

    def feature_indices(self, v: int) -> np.ndarray:
        start, end = self.features.indptr[v], self.features.indptr[v + 1]
        return np.asarray(self.features.indices[start:end], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class AttackedGraph:
    """A clean graph plus injected nodes and edges, as a persistent value.

    Injected node ids follow the clean ones: N, N+1, ... Every mutation
    returns a new overlay; the base graph and earlier overlays are never
    modified. Derived matrices are computed lazily and cached per value.
    """

    base: Graph
    injected_features: tuple[np.ndarray, ...] = ()
    injected_edges: tuple[tuple[int, int], ...] = ()

    @classmethod
    def clean(cls, base: Graph) -> "AttackedGraph":
        return cls(base=base)

    @property
    def num_nodes(self) -> int:
        return self.base.num_nodes + len(self.injected_features)

    @property
    def num_features(self) -> int:
        return self.base.num_features

    @property
    def num_injected(self) -> int:
        return len(self.injected_features)

    def injected_ids(self) -> range:
        return range(self.base.num_nodes, self.num_nodes)

    def is_injected(self, v: int) -> bool:
        return self.base.num_nodes <= v < self.num_nodes

    def check_node(self, v: int) -> int:
        """Return ``v`` as int or raise GraphIndexError when it is not a node id."""
        if not 0 <= int(v) < self.num_nodes:
            raise GraphIndexError(f"node {v} outside [0, {self.num_nodes})")
        return int(v)

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Binary symmetric adjacency of clean plus injected edges."""
        if not self.injected_features:
            return self.base.adjacency
        base = self.base.adjacency.tocoo()
        extra = np.asarray(self.injected_edges, dtype=np.int64).reshape(-1, 2)
        rows = np.concatenate([base.row, extra[:, 0], extra[:, 1]])
        cols = np.concatenate([base.col, extra[:, 1], extra[:, 0]])
        n = self.num_nodes
        adj = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
        adj.sort_indices()
        return adj

    @cached_property
    def normalized_adjacency(self) -> sp.csr_matrix:
        return normalize_adjacency(self.adjacency)

    @cached_property
    def features(self) -> sp.csr_matrix:
        """Binary N'×F feature matrix with injected rows appended."""
        if not self.injected_features:
            return self.base.features
        return sp.csr_matrix(sp.vstack([self.base.features, self.injected_block()], format="csr"))

    def injected_block(self) -> sp.csr_matrix:
        """Feature rows of the injected nodes only."""
        return _binary_csr([row.tolist() for row in self.injected_features], self.num_features)

    def neighbors(self, v: int) -> np.ndarray:
        v = self.check_node(v)
        adj = self.adjacency
        return np.asarray(adj.indices[adj.indptr[v] : adj.indptr[v + 1]], dtype=np.int64)

    def degree(self, v: int) -> int:
        v = self.check_node(v)
        return int(self.adjacency.indptr[v + 1] - self.adjacency.indptr[v])

    def has_edge(self, a: int, b: int) -> bool:
        return bool(np.isin(int(b), self.neighbors(a)))

    def feature_indices(self, v: int) -> np.ndarray:
        v = self.check_node(v)
        if v < self.base.num_nodes:
            return self.base.feature_indices(v)
        return self.injected_features[v - self.base.num_nodes].copy()

    def feature_vector(self, v: int) -> np.ndarray:
        """Dense binary feature row of node ``v``."""
        row = np.zeros(self.num_features, dtype=np.float64)
        row[self.feature_indices(v)] = 1.0
        return row

    def inject(self, x_a: np.ndarray) -> tuple["AttackedGraph", int]:
        """Append an isolated node with binary features ``x_a``.

        Raises:
            FeatureValidationError: If ``x_a`` is not a binary vector of width F.
        """
        x_a = np.asarray(x_a)
        if x_a.shape != (self.num_features,):
            raise FeatureValidationError(
                f"feature vector has shape {x_a.shape}, expected ({self.num_features},)"
            )
        if not np.all((x_a == 0) | (x_a == 1)):
            raise FeatureValidationError("injected features must be binary")
        active = np.flatnonzero(x_a).astype(np.int64)
        active.flags.writeable = False
        new_id = self.num_nodes
        return (
            AttackedGraph(self.base, self.injected_features + (active,), self.injected_edges),
            new_id,
        )

    def wire(self, a: int, b: int) -> "AttackedGraph":
        """Add the undirected edge (a, b) from injected node ``a``.

        Raises:
            GraphIndexError: If either id is not a node.
            ConstraintError: If ``a`` is not injected, ``a == b`` or the edge exists.
        """
        a, b = self.check_node(a), self.check_node(b)
        if not self.is_injected(a):
            raise ConstraintError(f"edges must start at an injected node, got {a}")
        if a == b:
            raise ConstraintError(f"self-loop on node {a}")
        if self.has_edge(a, b):
            raise ConstraintError(f"edge ({a}, {b}) already present")
        return AttackedGraph(self.base, self.injected_features, self.injected_edges + ((a, b),))

    def injected_degrees(self) -> list[int]:
        return [self.degree(v) for v in self.injected_ids()]

    def injected_feature_sums(self) -> list[int]:
        return [int(row.size) for row in self.injected_features]


def inject_node(g: AttackedGraph, x_a: np.ndarray) -> tuple[AttackedGraph, int]:
    """Functional form of :meth:`AttackedGraph.inject`."""
    return g.inject(x_a)


def wire_edge(g: AttackedGraph, a: int, b: int) -> AttackedGraph:
    """Functional form of :meth:`AttackedGraph.wire`."""
    return g.wire(a, b)
