"""Atomic file writes for reports, checkpoints and metric streams."""

import json
import os
import tempfile
from collections.abc import Iterable
from pathlib import Path
from typing import Any

from pydantic import BaseModel


def atomic_write_text(path: Path, text: str) -> None:
    """Write text to path via a temporary file and rename.

    Args:
        path: Destination file. Parent directories are created.
        text: Content to write.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


def atomic_write_json(path: Path, payload: Any) -> None:
    """Serialize payload as indented JSON and write it atomically."""
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    atomic_write_text(path, json.dumps(payload, indent=2, allow_nan=False) + "\n")


class JsonLinesWriter:
    """Append-only JSON lines stream, one record per line.

    Records are buffered and the file is rewritten atomically on every
    flush, so readers never see a torn line.
    """

    def __init__(self, path: Path):
        self.path = Path(path)
        self._lines: list[str] = []

    def write(self, record: BaseModel | dict[str, Any]) -> None:
        """Append a record and flush to disk."""
        self.extend([record])

    def extend(self, records: Iterable[BaseModel | dict[str, Any]]) -> None:
        """Append several records with a single flush."""
        for record in records:
            if isinstance(record, BaseModel):
                record = record.model_dump(mode="json")
            self._lines.append(json.dumps(record, allow_nan=False))
        atomic_write_text(self.path, "\n".join(self._lines) + "\n" if self._lines else "")

    def __len__(self) -> int:
        return len(self._lines)
