"""Attack budgets, the budget indicator and dataset statistics."""

import math

from pydantic import BaseModel, ConfigDict, Field

from ga2c.graph.graph import AttackedGraph, Graph
from ga2c.utils.errors import EmptyGraphError, GraphMismatchError


class AttackBudget(BaseModel):
    """Per-target limits on injected nodes, their degree and active features."""

    model_config = ConfigDict(frozen=True)

    beta_n: int = Field(ge=1, description="Maximum injected nodes")
    beta_e: int = Field(ge=1, description="Maximum degree of an injected node")
    beta_f: int = Field(ge=1, description="Maximum active features of an injected node")


class GraphStatistics(BaseModel):
    """Dataset size and the averages the default budgets are derived from."""

    num_nodes: int
    num_edges: int
    num_features: int
    num_classes: int
    avg_degree: float
    avg_feature_sum: float

    @property
    def degree_budget(self) -> int:
        return round_budget(self.avg_degree)

    @property
    def feature_budget(self) -> int:
        return round_budget(self.avg_feature_sum)


def round_budget(value: float) -> int:
    """Round half up to an integer count, never below 1."""
    return max(1, math.floor(value + 0.5))


def graph_statistics(g: Graph) -> GraphStatistics:
    """Compute N, |E|, F, C and the average degree and feature sum.

    Raises:
        EmptyGraphError: If the graph has no nodes.
    """
    if g.num_nodes == 0:
        raise EmptyGraphError("cannot compute statistics of an empty graph")
    return GraphStatistics(
        num_nodes=g.num_nodes,
        num_edges=g.num_edges,
        num_features=g.num_features,
        num_classes=g.num_classes,
        avg_degree=2.0 * g.num_edges / g.num_nodes,
        avg_feature_sum=g.features.nnz / g.num_nodes,
    )


def budget_indicator(clean: Graph, attacked: AttackedGraph, budget: AttackBudget) -> bool:
    """True iff the attacked graph stays within all three budgets.

    Counts are recomputed from the overlay itself: number of injected
    nodes, degree of each injected node and active features of each.

    Raises:
        GraphMismatchError: If ``attacked`` is not an overlay of ``clean``.
    """
    if attacked.base is not clean:
        raise GraphMismatchError("attacked graph is not an overlay of the given clean graph")
    if attacked.num_injected > budget.beta_n:
        return False
    if any(d > budget.beta_e for d in attacked.injected_degrees()):
        return False
    return all(s <= budget.beta_f for s in attacked.injected_feature_sums())
