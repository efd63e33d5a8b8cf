"""Parameters of the node generator, edge sampler and value predictor."""

import logging
from pathlib import Path
from typing import Any

import numpy as np
import scipy.sparse as sp

from ga2c.autodiff import Tensor
from ga2c.autodiff import functional as F
from ga2c.autodiff.checkpoint import (
    load_checkpoint,
    restore_tensor,
    save_checkpoint,
    to_checkpoint,
)
from ga2c.autodiff.init import glorot_uniform
from ga2c.config import AttackerConfig
from ga2c.utils.errors import ConfigurationError

logger = logging.getLogger(__name__)


class GCLStack:
    """K graph convolutions with ReLU, mapping binary features (width F) to width d."""

    def __init__(
        self,
        num_features: int,
        hidden: int,
        num_layers: int,
        rng: np.random.Generator,
        prefix: str,
    ):
        self.prefix = prefix
        widths = [num_features] + [hidden] * num_layers
        self.weights = [
            glorot_uniform((widths[k], widths[k + 1]), rng, name=f"{prefix}.gcl{k}")
            for k in range(num_layers)
        ]

    def parameters(self) -> dict[str, Tensor]:
        return {w.name: w for w in self.weights}

    def forward(
        self,
        adj_norm: sp.csr_matrix,
        features: sp.csr_matrix,
        extra_rows: Tensor | None = None,
    ) -> Tensor:
        """Node embeddings for ``features`` stacked over ``extra_rows``.

        ``extra_rows`` are dense feature rows appended after the sparse ones;
        they carry gradients when they come from a straight-through sample.
        """
        h = F.spmm(features, self.weights[0])
        if extra_rows is not None and extra_rows.shape[0]:
            h = F.concat([h, F.matmul(extra_rows, self.weights[0])], axis=0)
        h = F.relu(F.spmm(adj_norm, h))
        for w in self.weights[1:]:
            h = F.relu(F.spmm(adj_norm, F.matmul(h, w)))
        return h


class PolicySet:
    """The three attacker networks and their shared hyperparameters.

    Attributes:
        generator: GCL stack of the node generator.
        w_feature: 2d×F projection from (readout ∥ target embedding) to feature logits.
        edge_stack: GCL stack of the edge sampler.
        w_edge: (d+F)×1 scoring vector over (node embedding ∥ injected features).
        value_stack: GCL stack of the value predictor.
        w_value: (d+C)×C projection from (target embedding ∥ victim probabilities).
    """

    def __init__(
        self,
        num_features: int,
        num_classes: int,
        config: AttackerConfig | None = None,
        rng: np.random.Generator | None = None,
    ):
        self.config = config or AttackerConfig()
        rng = rng if rng is not None else np.random.default_rng(0)
        d, k = self.config.hidden, self.config.num_layers
        self.num_features = num_features
        self.num_classes = num_classes
        self.generator = GCLStack(num_features, d, k, rng, "g_n")
        self.w_feature = glorot_uniform((2 * d, num_features), rng, name="g_n.w_f")
        self.edge_stack = GCLStack(num_features, d, k, rng, "g_e")
        self.w_edge = glorot_uniform((d + num_features, 1), rng, name="g_e.w_e")
        self.value_stack = GCLStack(num_features, d, k, rng, "g_v")
        self.w_value = glorot_uniform((d + num_classes, num_classes), rng, name="g_v.w_v")

    def parameters(self) -> dict[str, Tensor]:
        """All trainable tensors keyed by name, in a fixed order."""
        params: dict[str, Tensor] = {}
        params.update(self.generator.parameters())
        params[self.w_feature.name] = self.w_feature
        params.update(self.edge_stack.parameters())
        params[self.w_edge.name] = self.w_edge
        params.update(self.value_stack.parameters())
        params[self.w_value.name] = self.w_value
        return params

    def hyperparameters(self) -> dict[str, Any]:
        return {
            "num_features": self.num_features,
            "num_classes": self.num_classes,
            **self.config.model_dump(),
        }

    def snapshot(self) -> dict[str, np.ndarray]:
        """Copies of all parameter values."""
        return {name: t.numpy() for name, t in self.parameters().items()}

    def restore(self, snapshot: dict[str, np.ndarray]) -> None:
        """Overwrite parameter values in place from :meth:`snapshot` output."""
        for name, t in self.parameters().items():
            t.data = snapshot[name].copy()
            t.zero_grad()


def save_policy(policy: PolicySet, path: Path, metadata: dict[str, Any] | None = None) -> None:
    """Persist policy weights with their hyperparameter block."""
    checkpoint = to_checkpoint(
        policy.parameters(),
        kind="policy",
        hyperparameters=policy.hyperparameters(),
        metadata=metadata,
    )
    save_checkpoint(path, checkpoint)


def load_policy(path: Path, num_features: int, num_classes: int) -> PolicySet:
    """Restore a policy checkpoint for a dataset of the given dimensions.

    Raises:
        ConfigurationError: If the checkpoint is missing, invalid, or was
            trained for other dimensions.
    """
    checkpoint = load_checkpoint(path, kind="policy")
    hp = dict(checkpoint.hyperparameters)
    if hp.get("num_features") != num_features or hp.get("num_classes") != num_classes:
        raise ConfigurationError(
            f"Policy {path} was trained for F={hp.get('num_features')}, "
            f"C={hp.get('num_classes')}; dataset has F={num_features}, C={num_classes}"
        )
    config = AttackerConfig.model_validate(
        {k: v for k, v in hp.items() if k in AttackerConfig.model_fields}
    )
    policy = PolicySet(num_features, num_classes, config)
    for name, t in policy.parameters().items():
        restored = restore_tensor(checkpoint, name, t.shape)
        t.data = restored.data
    logger.info(f"Loaded policy checkpoint {path}")
    return policy
