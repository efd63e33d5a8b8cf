"""Tests for structured logging."""

import json
import logging
from datetime import datetime

import pytest

from ga2c.utils.logging import (
    JsonFormatter,
    TextFormatter,
    configure_logging,
    generate_run_id,
    is_valid_uuid,
    run_context,
    run_id_var,
)


def _record(msg: str = "Test message", level: int = logging.INFO, **extra) -> logging.LogRecord:
    record = logging.LogRecord(
        name="test",
        level=level,
        pathname="test.py",
        lineno=1,
        msg=msg,
        args=(),
        exc_info=None,
    )
    for key, value in extra.items():
        setattr(record, key, value)
    return record


class TestJsonFormatter:
    """Tests for JsonFormatter."""

    def test_basic_log_format(self):
        """Test basic log formatting."""
        data = json.loads(JsonFormatter().format(_record()))
        assert data["level"] == "INFO"
        assert data["message"] == "Test message"
        assert data["logger"] == "test"
        assert "run_id" not in data

    def test_timestamp_format(self):
        """Test timestamp is ISO 8601 with Z suffix."""
        data = json.loads(JsonFormatter().format(_record()))
        assert data["timestamp"].endswith("Z")
        datetime.fromisoformat(data["timestamp"].replace("Z", "+00:00"))

    def test_includes_run_id_from_context(self):
        """Test run id from the context variable."""
        with run_context() as run_id:
            data = json.loads(JsonFormatter().format(_record()))
        assert data["run_id"] == run_id

    def test_includes_experiment_fields(self):
        """Test stage, dataset, epoch and other extras are copied."""
        record = _record(stage="attack-train", dataset="cora", epoch=3, success_rate=0.5)
        data = json.loads(JsonFormatter().format(record))
        assert data["stage"] == "attack-train"
        assert data["dataset"] == "cora"
        assert data["epoch"] == 3
        assert data["success_rate"] == 0.5

    def test_skips_unknown_and_none_extras(self):
        """Test that only known, set extras appear."""
        data = json.loads(JsonFormatter().format(_record(seed=None, secret="x")))
        assert "seed" not in data
        assert "secret" not in data

    def test_includes_exception(self):
        """Test exception text is included."""
        try:
            raise ValueError("bad")
        except ValueError:
            import sys

            record = _record(level=logging.ERROR)
            record.exc_info = sys.exc_info()
        data = json.loads(JsonFormatter().format(record))
        assert "ValueError: bad" in data["exception"]


class TestTextFormatter:
    """Tests for TextFormatter."""

    def test_plain_message(self):
        """Test text output without a run."""
        output = TextFormatter().format(_record())
        assert "INFO" in output
        assert output.endswith("Test message")

    def test_run_id_prefix(self):
        """Test the short run id prefix."""
        with run_context() as run_id:
            output = TextFormatter().format(_record())
        assert f"[{run_id[:8]}] Test message" in output


class TestRunContext:
    """Tests for run id binding."""

    def test_keeps_valid_id(self):
        """Test that a valid UUID is bound unchanged."""
        run_id = generate_run_id()
        with run_context(run_id) as bound:
            assert bound == run_id
            assert run_id_var.get() == run_id
        assert run_id_var.get() is None

    @pytest.mark.parametrize("given", [None, "", "not-a-uuid"])
    def test_replaces_invalid_id(self, given):
        """Test that missing or malformed ids are replaced."""
        with run_context(given) as bound:
            assert is_valid_uuid(bound)
            assert bound != given


class TestConfigureLogging:
    """Tests for configure_logging."""

    def test_json_handler(self):
        """Test that JSON format installs a single JSON handler."""
        configure_logging(level="DEBUG", format="json")
        root = logging.getLogger()
        assert len(root.handlers) == 1
        assert isinstance(root.handlers[0].formatter, JsonFormatter)
        assert root.level == logging.DEBUG

    def test_text_handler(self):
        """Test text format."""
        configure_logging(level="WARNING", format="text")
        root = logging.getLogger()
        assert isinstance(root.handlers[0].formatter, TextFormatter)
        assert logging.getLogger("httpx").level == logging.WARNING
