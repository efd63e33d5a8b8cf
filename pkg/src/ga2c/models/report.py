"""Attack report data models."""

from typing import Literal

from pydantic import BaseModel, Field, computed_field

AttackMethod = Literal["ga2c", "random", "node_plus_random", "random_plus_edge"]


class TargetRecord(BaseModel):
    """Outcome of attacking one target node."""

    target: int
    true_label: int
    clean_label: int
    attacked_label: int
    success: bool = Field(description="Predicted label moved away from the clean prediction")
    queries: int
    injected_count: int
    injected_degrees: list[int]
    injected_feature_sums: list[int]
    within_budget: bool
    initial_loss: float
    final_loss: float

    @property
    def correct_after(self) -> bool:
        return self.attacked_label == self.true_label


class BudgetRecord(BaseModel):
    beta_n: int
    beta_e: int
    beta_f: int


class AttackReport(BaseModel):
    """Per-target records of one evaluation plus run metadata.

    Attacked accuracy is recounted from the records: targets whose attacked
    prediction matches the ground-truth label, over all targets.
    """

    method: AttackMethod
    dataset: str
    seed: int
    budget: BudgetRecord
    records: list[TargetRecord]
    wall_time_seconds: float = 0.0

    @computed_field
    @property
    def num_targets(self) -> int:
        return len(self.records)

    @computed_field
    @property
    def attacked_accuracy(self) -> float:
        if not self.records:
            return 0.0
        return sum(r.correct_after for r in self.records) / len(self.records)

    @computed_field
    @property
    def clean_accuracy(self) -> float:
        if not self.records:
            return 0.0
        return sum(r.clean_label == r.true_label for r in self.records) / len(self.records)

    @computed_field
    @property
    def success_rate(self) -> float:
        if not self.records:
            return 0.0
        return sum(r.success for r in self.records) / len(self.records)

    @property
    def all_within_budget(self) -> bool:
        return all(r.within_budget for r in self.records)
