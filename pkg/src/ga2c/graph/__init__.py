"""Graph data model, normalisation, subgraphs and injection overlays."""

from ga2c.graph.budget import (
    AttackBudget,
    GraphStatistics,
    budget_indicator,
    graph_statistics,
    round_budget,
)
from ga2c.graph.graph import AttackedGraph, Graph, inject_node, wire_edge
from ga2c.graph.normalize import normalize_adjacency, row_normalize
from ga2c.graph.subgraph import Subgraph, k_order_subgraph, khop_nodes

__all__ = [
    "AttackBudget",
    "AttackedGraph",
    "Graph",
    "GraphStatistics",
    "Subgraph",
    "budget_indicator",
    "graph_statistics",
    "inject_node",
    "k_order_subgraph",
    "khop_nodes",
    "normalize_adjacency",
    "round_budget",
    "row_normalize",
    "wire_edge",
]
