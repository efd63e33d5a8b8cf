"""JSON persistence of named tensors."""

import json
import logging
from collections.abc import Mapping
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import ValidationError

from ga2c.autodiff.tensor import Tensor
from ga2c.models.checkpoint import CHECKPOINT_FORMAT_VERSION, Checkpoint, TensorRecord
from ga2c.utils.errors import ConfigurationError
from ga2c.utils.io import atomic_write_text

logger = logging.getLogger(__name__)


def to_checkpoint(
    tensors: Mapping[str, Tensor],
    kind: Literal["victim", "policy"],
    hyperparameters: dict[str, Any] | None = None,
    metadata: dict[str, Any] | None = None,
) -> Checkpoint:
    """Pack tensors into a checkpoint model, in mapping order."""
    records = [
        TensorRecord(name=name, shape=list(t.shape), values=t.data.reshape(-1).tolist())
        for name, t in tensors.items()
    ]
    return Checkpoint(
        kind=kind,
        tensors=records,
        hyperparameters=hyperparameters or {},
        metadata=metadata or {},
    )


def save_checkpoint(path: Path, checkpoint: Checkpoint) -> None:
    """Write a checkpoint atomically.

    Floats are written with ``repr`` precision (17 significant digits), so
    loading gives back bit-identical float64 values.
    """
    payload = checkpoint.model_dump(mode="json")
    atomic_write_text(Path(path), json.dumps(payload, allow_nan=False) + "\n")
    logger.info(
        f"Saved {checkpoint.kind} checkpoint with {len(checkpoint.tensors)} tensors to {path}"
    )


def load_checkpoint(path: Path, kind: Literal["victim", "policy"] | None = None) -> Checkpoint:
    """Read and validate a checkpoint file.

    Raises:
        ConfigurationError: If the file is missing, malformed, of another
            kind or of an unsupported format version.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Checkpoint not found: {path}")
    try:
        checkpoint = Checkpoint.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise ConfigurationError(f"Invalid checkpoint {path}: {e}") from e
    if checkpoint.format_version != CHECKPOINT_FORMAT_VERSION:
        raise ConfigurationError(
            f"Unsupported checkpoint format version {checkpoint.format_version} in {path}"
        )
    if kind is not None and checkpoint.kind != kind:
        raise ConfigurationError(f"Expected a {kind} checkpoint, {path} holds a {checkpoint.kind}")
    return checkpoint


def restore_tensor(checkpoint: Checkpoint, name: str, shape: tuple[int, ...]) -> Tensor:
    """Rebuild one trainable tensor, checking its shape.

    Raises:
        ConfigurationError: If the parameter is missing or its stored shape
            differs from ``shape`` (checkpoint from another dataset).
    """
    try:
        record = checkpoint.tensor(name)
    except KeyError as e:
        raise ConfigurationError(f"Checkpoint has no parameter {name!r}") from e
    if tuple(record.shape) != tuple(shape):
        raise ConfigurationError(
            f"parameter {name!r}: stored shape {record.shape}, expected {list(shape)}"
        )
    data = np.asarray(record.values, dtype=np.float64).reshape(shape)
    return Tensor(data, requires_grad=True, name=name)
