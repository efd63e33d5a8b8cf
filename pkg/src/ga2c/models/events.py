"""JSON-lines record models for episode traces and training metrics."""

from typing import Annotated, Literal, Union

from pydantic import BaseModel, Field

# =============================================================================
# Episode Trace Records
# =============================================================================


class NodeTraceRecord(BaseModel):
    """A node-generation step of an episode."""

    step_type: Literal["node"] = "node"
    target: int
    chosen: int = Field(description="Id of the injected node")
    active_features: list[int]


class EdgeTraceRecord(BaseModel):
    """An edge-wiring step of an episode."""

    step_type: Literal["edge"] = "edge"
    target: int
    injected: int
    chosen: int
    reward: float
    value: float | None = None
    loss_before: float
    loss_after: float


TraceRecord = Annotated[
    Union[NodeTraceRecord, EdgeTraceRecord],
    Field(discriminator="step_type"),
]


# =============================================================================
# Training Metrics
# =============================================================================


class EpochMetrics(BaseModel):
    """One line of the training metrics stream."""

    epoch: int
    mean_Lp: float
    mean_Lv: float
    mean_Lf: float
    probe_success_rate: float = Field(ge=0.0, le=1.0)
    victim_query_count: int
    best_success_rate: float = Field(ge=0.0, le=1.0)
