"""On-disk dataset data models."""

from pydantic import BaseModel, Field


class SplitFile(BaseModel):
    """Public split: node ids per split, as they appear in the source files."""

    train: list[int | str] = Field(default_factory=list)
    val: list[int | str] = Field(default_factory=list)
    test: list[int | str] = Field(default_factory=list)


class CanonicalDataset(BaseModel):
    """Canonical JSON dataset: edges, active feature indices, labels and splits."""

    num_nodes: int = Field(ge=0)
    num_features: int = Field(ge=1)
    num_classes: int = Field(ge=1)
    edges: list[tuple[int, int]]
    features: list[list[int]]
    labels: list[int] | None = None
    splits: dict[str, list[int]] = Field(default_factory=dict)
