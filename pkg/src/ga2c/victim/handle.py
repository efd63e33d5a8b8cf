"""Sealed victim model exposing probability queries only."""

import logging
import threading
from pathlib import Path
from typing import Any

import numpy as np

from ga2c.autodiff import Tensor, no_grad
from ga2c.autodiff import functional as F
from ga2c.autodiff.checkpoint import (
    load_checkpoint,
    restore_tensor,
    save_checkpoint,
    to_checkpoint,
)
from ga2c.config import VictimConfig
from ga2c.graph.graph import AttackedGraph, Graph
from ga2c.utils.errors import ConfigurationError, GraphMismatchError
from ga2c.victim.gcn import GCNModel, accuracy, fit_gcn, gcn_forward

logger = logging.getLogger(__name__)


class VictimHandle:
    """A trained GCN bound to its clean graph.

    The handle answers probability queries for a node on an attacked
    version of the clean graph and counts them. Clean predictions are
    computed once when the handle is sealed and are not counted.
    """

    def __init__(self, model: GCNModel, graph: Graph, metadata: dict[str, Any] | None = None):
        self._model = model
        self._graph = graph
        self._metadata = dict(metadata or {})
        self._lock = threading.Lock()
        self._query_count = 0
        with no_grad():
            features = model.prepare_features(graph.features)
            self._clean_projection = model.input_projection(features).data
            self._clean_probs = gcn_forward(model, graph).data
        self._clean_probs.flags.writeable = False
        self._clean_labels = np.argmax(self._clean_probs, axis=1)
        self._clean_labels.flags.writeable = False

    @property
    def graph(self) -> Graph:
        return self._graph

    @property
    def num_classes(self) -> int:
        return self._model.num_classes

    @property
    def num_features(self) -> int:
        return self._model.num_features

    @property
    def metadata(self) -> dict[str, Any]:
        return dict(self._metadata)

    @property
    def query_count(self) -> int:
        return self._query_count

    def clean_prediction(self, v: int) -> np.ndarray:
        """Cached f(v, G) on the clean graph."""
        return self._clean_probs[int(v)].copy()

    def clean_label(self, v: int) -> int:
        """Argmax of the cached clean prediction for ``v``."""
        return int(self._clean_labels[int(v)])

    def clean_accuracy(self, nodes: np.ndarray) -> float:
        """Accuracy of the clean predictions on ``nodes`` against ground truth."""
        if self._graph.labels is None:
            return 0.0
        return accuracy(self._clean_probs, self._graph.labels, np.asarray(nodes))

    def _forward(self, g: AttackedGraph) -> tuple[Tensor, Tensor]:
        if g.base is not self._graph:
            raise GraphMismatchError("attacked graph does not derive from the victim's graph")
        parts = [Tensor(self._clean_projection)]
        if g.num_injected:
            injected = self._model.prepare_features(g.injected_block())
            parts.append(self._model.input_projection(injected))
        return self._model.propagate(g.normalized_adjacency, F.concat(parts, axis=0))

    def query(self, v: int, g: AttackedGraph) -> np.ndarray:
        """Softmax probabilities of node ``v`` on ``g``; counts one query.

        Raises:
            GraphIndexError: If ``v`` is not a node of ``g``.
            GraphMismatchError: If ``g`` is not an overlay of the victim's graph.
        """
        v = g.check_node(v)
        with no_grad():
            _, logits = self._forward(g)
            probs = F.softmax_row(F.index(logits, v)).data.copy()
        with self._lock:
            self._query_count += 1
        return probs

    def target_loss(self, v: int, g: AttackedGraph) -> float:
        """Cross-entropy of query(v, g) against the clean predicted label."""
        probs = self.query(v, g)
        return F.loss_from_probs(probs, self.clean_label(v))

    def hidden_embeddings(self, g: AttackedGraph) -> np.ndarray:
        """First-layer post-activation embeddings of every node of ``g``."""
        with no_grad():
            hidden, _ = self._forward(g)
        return hidden.data.copy()


def train_victim(
    g: Graph,
    config: VictimConfig,
    seed: int = 0,
    show_progress: bool = False,
) -> VictimHandle:
    """Train the GCN on ``g`` and seal it into a handle.

    The handle's metadata records the dataset, seed and clean accuracies.
    """
    model, summary = fit_gcn(g, config, seed=seed, show_progress=show_progress)
    return VictimHandle(
        model,
        g,
        metadata={
            "dataset": g.name,
            "seed": seed,
            "clean_accuracy": summary["test_accuracy"],
            "val_accuracy": summary["val_accuracy"],
            "best_epoch": int(summary["best_epoch"]),
        },
    )


def save_victim(handle: VictimHandle, path: Path) -> None:
    """Persist the victim weights, hyperparameters and metadata."""
    model = handle._model
    checkpoint = to_checkpoint(
        model.parameters(),
        kind="victim",
        hyperparameters={
            "num_features": model.num_features,
            "num_classes": model.num_classes,
            "hidden": model.hidden,
            "dropout": model.dropout,
            "normalize_features": model.normalize_features,
        },
        metadata=handle.metadata,
    )
    save_checkpoint(path, checkpoint)


def load_victim(path: Path, graph: Graph) -> VictimHandle:
    """Restore a victim checkpoint against its clean graph.

    Raises:
        ConfigurationError: If the checkpoint is missing, invalid, or its
            dimensions do not match ``graph``.
    """
    checkpoint = load_checkpoint(path, kind="victim")
    hp = checkpoint.hyperparameters
    try:
        hidden = int(hp["hidden"])
        dropout = float(hp["dropout"])
        normalize = bool(hp["normalize_features"])
    except KeyError as e:
        raise ConfigurationError(f"Victim checkpoint {path} lacks hyperparameter {e}") from e
    model = GCNModel(
        graph.num_features,
        graph.num_classes,
        hidden=hidden,
        dropout=dropout,
        normalize_features=normalize,
    )
    model.w0 = restore_tensor(checkpoint, "w0", (graph.num_features, hidden))
    model.w1 = restore_tensor(checkpoint, "w1", (hidden, graph.num_classes))
    logger.info(f"Loaded victim checkpoint {path}", extra={"dataset": graph.name})
    return VictimHandle(model, graph, metadata=checkpoint.metadata)
