"""Checkpoint container data models."""

from typing import Any, Literal

from pydantic import BaseModel, Field, model_validator

CHECKPOINT_FORMAT_VERSION = 1


class TensorRecord(BaseModel):
    """One named parameter stored as a flat row-major value list."""

    name: str
    shape: list[int]
    values: list[float]

    @model_validator(mode="after")
    def _check_size(self) -> "TensorRecord":
        expected = 1
        for dim in self.shape:
            expected *= dim
        if expected != len(self.values):
            raise ValueError(
                f"tensor {self.name!r}: shape {self.shape} needs {expected} values, "
                f"got {len(self.values)}"
            )
        return self


class Checkpoint(BaseModel):
    """Self-describing parameter container for victim and policy weights."""

    format_version: int = CHECKPOINT_FORMAT_VERSION
    kind: Literal["victim", "policy"]
    tensors: list[TensorRecord]
    hyperparameters: dict[str, Any] = Field(default_factory=dict)
    metadata: dict[str, Any] = Field(default_factory=dict)

    def tensor(self, name: str) -> TensorRecord:
        """Look up a parameter by name.

        Raises:
            KeyError: If no parameter has that name.
        """
        for record in self.tensors:
            if record.name == name:
                return record
        raise KeyError(name)
