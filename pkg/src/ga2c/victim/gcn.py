"""Two-layer graph convolutional network and its training loop."""

import logging
import time

import numpy as np
import scipy.sparse as sp
from tqdm import tqdm

from ga2c.autodiff import Adam, Tensor, no_grad
from ga2c.autodiff import functional as F
from ga2c.autodiff.init import glorot_uniform
from ga2c.config import VictimConfig
from ga2c.graph.graph import AttackedGraph, Graph
from ga2c.graph.normalize import row_normalize
from ga2c.utils.errors import ConfigurationError, ShapeError
from ga2c.utils.seeding import derive_rng

logger = logging.getLogger(__name__)


class GCNModel:
    """softmax(Â relu(Â X W0) W1) without biases.

    Attributes:
        w0: F×hidden weight of the first layer.
        w1: hidden×C weight of the output layer.
        dropout: Rate applied to the input features and the hidden layer
            during training only.
        normalize_features: Row-normalise feature rows before the first layer.
    """

    def __init__(
        self,
        num_features: int,
        num_classes: int,
        hidden: int = 16,
        dropout: float = 0.5,
        normalize_features: bool = True,
        rng: np.random.Generator | None = None,
    ):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.w0 = glorot_uniform((num_features, hidden), rng, name="w0")
        self.w1 = glorot_uniform((hidden, num_classes), rng, name="w1")
        self.dropout = dropout
        self.normalize_features = normalize_features

    @property
    def num_features(self) -> int:
        return self.w0.shape[0]

    @property
    def hidden(self) -> int:
        return self.w0.shape[1]

    @property
    def num_classes(self) -> int:
        return self.w1.shape[1]

    def parameters(self) -> dict[str, Tensor]:
        return {"w0": self.w0, "w1": self.w1}

    def prepare_features(self, features: sp.spmatrix) -> sp.csr_matrix:
        """Apply feature preprocessing; rows are transformed independently."""
        if features.shape[1] != self.num_features:
            raise ShapeError(
                f"feature width {features.shape[1]} does not match model width {self.num_features}"
            )
        if self.normalize_features:
            return row_normalize(features)
        return sp.csr_matrix(features, dtype=np.float64)

    def input_projection(
        self,
        features: sp.spmatrix,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        """X W0 for already prepared features, with input dropout when ``rng`` is given."""
        return F.spmm(F.sparse_dropout(features, self.dropout, rng), self.w0)

    def propagate(
        self,
        adj_norm: sp.csr_matrix,
        projected: Tensor,
        rng: np.random.Generator | None = None,
    ) -> tuple[Tensor, Tensor]:
        """Run both graph convolutions from the projected input X W0.

        Returns:
            (hidden embeddings after ReLU, output logits).
        """
        hidden = F.relu(F.spmm(adj_norm, projected))
        logits = F.spmm(adj_norm, F.matmul(F.dropout(hidden, self.dropout, rng), self.w1))
        return hidden, logits

    def logits(self, g: AttackedGraph, rng: np.random.Generator | None = None) -> Tensor:
        projected = self.input_projection(self.prepare_features(g.features), rng)
        return self.propagate(g.normalized_adjacency, projected, rng)[1]


def gcn_forward(model: GCNModel, g: Graph | AttackedGraph) -> Tensor:
    """Row-stochastic class probabilities for every node, dropout disabled.

    Raises:
        ShapeError: If the feature width differs from the model's.
    """
    if isinstance(g, Graph):
        g = AttackedGraph.clean(g)
    return F.softmax_row(model.logits(g))


def accuracy(probs: np.ndarray, labels: np.ndarray, nodes: np.ndarray) -> float:
    """Fraction of ``nodes`` whose argmax prediction equals the label."""
    if nodes.size == 0:
        return 0.0
    return float(np.mean(np.argmax(probs[nodes], axis=1) == labels[nodes]))


def fit_gcn(
    g: Graph,
    config: VictimConfig,
    seed: int = 0,
    show_progress: bool = False,
) -> tuple[GCNModel, dict[str, float]]:
    """Train a GCN with cross-entropy on the training split.

    The weights of the epoch with the best validation accuracy are kept
    (earliest epoch on ties).

    Returns:
        The trained model and a summary with best_epoch, val_accuracy and
        test_accuracy.

    Raises:
        ConfigurationError: If labels or any split are missing.
    """
    if g.labels is None or not g.has_splits():
        raise ConfigurationError(f"Dataset {g.name} needs labels and train/val/test splits")

    rng = derive_rng(seed, 0)
    model = GCNModel(
        g.num_features,
        g.num_classes,
        hidden=config.hidden,
        dropout=config.dropout,
        normalize_features=config.normalize_features,
        rng=rng,
    )
    # Weight decay only on the first layer, as in the GCN reference setup
    opt_w0 = Adam([model.w0], lr=config.lr, weight_decay=config.weight_decay)
    opt_w1 = Adam([model.w1], lr=config.lr)

    clean = AttackedGraph.clean(g)
    adj_norm = clean.normalized_adjacency
    features = model.prepare_features(g.features)
    train_idx, val_idx, test_idx = g.splits["train"], g.splits["val"], g.splits["test"]
    train_labels = g.labels[train_idx]

    best_val = -1.0
    best_epoch = 0
    best_weights = {name: t.numpy() for name, t in model.parameters().items()}
    start = time.perf_counter()

    for epoch in tqdm(range(config.epochs), desc="victim", disable=not show_progress):
        opt_w0.zero_grad()
        opt_w1.zero_grad()
        _, logits = model.propagate(adj_norm, model.input_projection(features, rng), rng)
        loss = F.log_softmax_nll(F.index(logits, train_idx), train_labels)
        loss.backward()
        opt_w0.step()
        opt_w1.step()

        with no_grad():
            _, eval_logits = model.propagate(adj_norm, model.input_projection(features))
        val_acc = accuracy(eval_logits.data, g.labels, val_idx)
        if val_acc > best_val:
            best_val = val_acc
            best_epoch = epoch
            best_weights = {name: t.numpy() for name, t in model.parameters().items()}
        logger.debug(
            f"Victim epoch {epoch}: loss={loss.item():.4f} val_acc={val_acc:.4f}",
            extra={"epoch": epoch, "dataset": g.name},
        )

    for name, t in model.parameters().items():
        t.data = best_weights[name]

    with no_grad():
        probs = gcn_forward(model, clean).data
    summary = {
        "best_epoch": float(best_epoch),
        "val_accuracy": best_val,
        "test_accuracy": accuracy(probs, g.labels, test_idx),
    }
    logger.info(
        f"Trained victim on {g.name}: val_acc={best_val:.4f} "
        f"test_acc={summary['test_accuracy']:.4f} (epoch {best_epoch})",
        extra={
            "dataset": g.name,
            "seed": seed,
            "duration_ms": round((time.perf_counter() - start) * 1000, 2),
        },
    )
    return model, summary
