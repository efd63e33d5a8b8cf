"""Adjacency and feature normalisation."""

from typing import TYPE_CHECKING

import numpy as np
import scipy.sparse as sp

if TYPE_CHECKING:
    from ga2c.graph.graph import AttackedGraph, Graph


def normalize_adjacency(g: "Graph | AttackedGraph | sp.spmatrix") -> sp.csr_matrix:
    """Symmetric normalisation with self-loops, D^-1/2 (A + I) D^-1/2.

    Entry (i, j) equals 1 / sqrt((d_i + 1)(d_j + 1)) for every edge and the
    diagonal, where d is the degree without the self-loop.
    """
    adj = g if sp.issparse(g) else g.adjacency
    n = adj.shape[0]
    with_loops = sp.csr_matrix(adj) + sp.identity(n, format="csr")
    degree = np.asarray(with_loops.sum(axis=1)).reshape(-1)
    inv_sqrt = sp.diags(1.0 / np.sqrt(degree))
    normalized = sp.csr_matrix(inv_sqrt @ with_loops @ inv_sqrt)
    normalized.sort_indices()
    return normalized


def row_normalize(features: sp.spmatrix) -> sp.csr_matrix:
    """Scale every non-empty row to sum 1; empty rows stay zero."""
    features = sp.csr_matrix(features, dtype=np.float64)
    sums = np.asarray(features.sum(axis=1)).reshape(-1)
    scale = np.divide(1.0, sums, out=np.zeros_like(sums), where=sums > 0)
    return sp.csr_matrix(sp.diags(scale) @ features)
