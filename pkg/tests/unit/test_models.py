"""Tests for checkpoint, dataset and trace record models."""

import pytest
from pydantic import TypeAdapter, ValidationError

from ga2c.models.checkpoint import CHECKPOINT_FORMAT_VERSION, Checkpoint, TensorRecord
from ga2c.models.dataset import CanonicalDataset, SplitFile
from ga2c.models.events import EdgeTraceRecord, EpochMetrics, NodeTraceRecord, TraceRecord


class TestTensorRecord:
    """Tests for TensorRecord."""

    def test_size_matches_shape(self):
        """Test a record whose values fill its shape."""
        record = TensorRecord(name="w0", shape=[2, 3], values=[0.0] * 6)
        assert record.shape == [2, 3]

    def test_size_mismatch_rejected(self):
        """Test that a wrong number of values is a validation error."""
        with pytest.raises(ValidationError, match="needs 6 values"):
            TensorRecord(name="w0", shape=[2, 3], values=[0.0] * 5)

    def test_scalar_shape(self):
        """Test that an empty shape holds exactly one value."""
        assert TensorRecord(name="b", shape=[], values=[1.5]).values == [1.5]


class TestCheckpoint:
    """Tests for Checkpoint."""

    def test_defaults_and_lookup(self):
        """Test the format version and lookup by name."""
        checkpoint = Checkpoint(
            kind="policy",
            tensors=[TensorRecord(name="g_n.w_f", shape=[1], values=[0.5])],
        )
        assert checkpoint.format_version == CHECKPOINT_FORMAT_VERSION
        assert checkpoint.tensor("g_n.w_f").values == [0.5]
        with pytest.raises(KeyError):
            checkpoint.tensor("g_e.w_e")

    def test_unknown_kind_rejected(self):
        """Test that only victim and policy checkpoints exist."""
        with pytest.raises(ValidationError):
            Checkpoint(kind="optimizer", tensors=[])


class TestDatasetModels:
    """Tests for the on-disk dataset models."""

    def test_canonical_dataset(self):
        """Test a minimal canonical dataset."""
        data = CanonicalDataset.model_validate(
            {
                "num_nodes": 2,
                "num_features": 1,
                "num_classes": 2,
                "edges": [[0, 1]],
                "features": [[0], []],
            }
        )
        assert data.edges == [(0, 1)]
        assert data.labels is None
        assert data.splits == {}

    def test_feature_width_must_be_positive(self):
        """Test num_features >= 1."""
        with pytest.raises(ValidationError):
            CanonicalDataset(num_nodes=1, num_features=0, num_classes=1, edges=[], features=[[]])

    def test_split_file_keeps_raw_ids(self):
        """Test that split files accept string ids and integers."""
        split = SplitFile(train=["p1", 3])
        assert split.train == ["p1", 3]
        assert split.test == []


class TestTraceRecords:
    """Tests for episode trace records."""

    def test_discriminated_by_step_type(self):
        """Test that trace lines parse back into the right record type."""
        adapter = TypeAdapter(TraceRecord)
        node = adapter.validate_python(
            {"step_type": "node", "target": 0, "chosen": 10, "active_features": [1]}
        )
        edge = adapter.validate_python(
            {
                "step_type": "edge",
                "target": 0,
                "injected": 10,
                "chosen": 0,
                "reward": 1.2,
                "loss_before": 0.1,
                "loss_after": 0.3,
            }
        )
        assert isinstance(node, NodeTraceRecord)
        assert isinstance(edge, EdgeTraceRecord)
        assert edge.value is None


class TestEpochMetrics:
    """Tests for EpochMetrics."""

    def test_rates_are_probabilities(self):
        """Test that success rates must lie in [0, 1]."""
        fields = {
            "epoch": 0,
            "mean_Lp": 0.1,
            "mean_Lv": 0.2,
            "mean_Lf": 0.3,
            "probe_success_rate": 0.5,
            "victim_query_count": 12,
            "best_success_rate": 0.5,
        }
        assert EpochMetrics(**fields).victim_query_count == 12
        with pytest.raises(ValidationError):
            EpochMetrics(**{**fields, "probe_success_rate": 1.5})
