"""Adversarial node generator: binary feature sampling around a target."""

from dataclasses import dataclass
from typing import Literal

import numpy as np

from ga2c.attacker.policy import PolicySet
from ga2c.autodiff import Tensor
from ga2c.autodiff import functional as F
from ga2c.graph.graph import AttackedGraph
from ga2c.graph.subgraph import k_order_subgraph

Mode = Literal["explore", "greedy"]


@dataclass(frozen=True, eq=False)
class FeatureSample:
    """One generated feature vector.

    Attributes:
        probs: Clamped mixture probabilities p (F,).
        relaxed: sigmoid((log p + noise) / tau) (F,).
        sampled: Hard rounding of ``relaxed`` before the feature budget cut.
        hard: Emitted binary features, at most beta_f ones.
        noise: Gumbel draws used, kept so the sample can be replayed.
        relaxed_tensor: ``relaxed`` on the tape when recording, else None.
    """

    probs: np.ndarray
    relaxed: np.ndarray
    sampled: np.ndarray
    hard: np.ndarray
    noise: np.ndarray
    relaxed_tensor: Tensor | None = None

    def straight_through(self) -> Tensor:
        """Emitted row with gradients routed through the relaxed values."""
        soft = self.relaxed_tensor if self.relaxed_tensor is not None else Tensor(self.relaxed)
        return F.straight_through(self.hard, soft)

    def straight_through_sampled(self) -> Tensor:
        """Sampled row before the budget cut, with relaxed gradients."""
        soft = self.relaxed_tensor if self.relaxed_tensor is not None else Tensor(self.relaxed)
        return F.straight_through(self.sampled, soft)


def round_half_up(relaxed: np.ndarray) -> np.ndarray:
    """floor(x + 1/2) elementwise."""
    return np.floor(relaxed + 0.5)


def top_indices(scores: np.ndarray, k: int, candidates: np.ndarray | None = None) -> np.ndarray:
    """Indices of the ``k`` largest scores, ties broken by lowest index."""
    idx = np.arange(scores.size) if candidates is None else np.asarray(candidates)
    order = np.lexsort((idx, -scores[idx]))
    return np.sort(idx[order[:k]])


def truncate_to_budget(hard: np.ndarray, relaxed: np.ndarray, beta_f: int) -> np.ndarray:
    """Keep at most ``beta_f`` active entries, those with the largest relaxed values."""
    active = np.flatnonzero(hard)
    if active.size <= beta_f:
        return hard.copy()
    out = np.zeros_like(hard)
    out[top_indices(relaxed, beta_f, active)] = 1.0
    return out


def feature_probabilities(policy: PolicySet, g: AttackedGraph, v: int) -> Tensor:
    """Clamped mixture p = alpha z + (1 - alpha) mean(subgraph features).

    z = sigmoid((readout(H) ∥ H[v]) W_f) with H the generator embeddings of
    the K-order subgraph of ``v``.
    """
    config = policy.config
    sub = k_order_subgraph(g, v, config.num_layers)
    h = policy.generator.forward(sub.normalized_adjacency, sub.features)
    pooled = F.readout(h, config.readout)
    center = F.index(h, sub.center)
    z = F.sigmoid(F.matmul(F.concat([pooled, center]), policy.w_feature))
    mean = Tensor((1.0 - config.alpha_n) * sub.mean_features())
    p = F.add(F.mul(z, config.alpha_n), mean)
    return F.clamp(p, config.clamp_eps, 1.0 - config.clamp_eps)


def generate_node(
    policy: PolicySet,
    g: AttackedGraph,
    v: int,
    beta_f: int,
    rng: np.random.Generator | None = None,
    mode: Mode = "explore",
    noise: np.ndarray | None = None,
) -> FeatureSample:
    """Sample the binary features of a new adversarial node for target ``v``.

    Explore mode draws x[i] = floor(sigmoid((log p[i] + G[i]) / tau) + 1/2)
    with G ~ Gumbel(0, 1) (or the supplied ``noise``), then keeps the
    ``beta_f`` active entries with the largest relaxed values. Greedy mode
    and the ``topk`` sampler emit the ``beta_f`` entries with the largest p.

    Raises:
        GraphIndexError: If ``v`` is not a node of ``g``.
    """
    config = policy.config
    p = feature_probabilities(policy, g, v)
    num_features = p.shape[0]

    if mode == "greedy" or config.feature_sampler == "topk":
        hard = np.zeros(num_features)
        hard[top_indices(p.data, beta_f)] = 1.0
        zero = np.zeros(num_features)
        relaxed = F.sigmoid(F.mul(F.log(p), 1.0 / config.temperature))
        return FeatureSample(
            probs=p.data.copy(),
            relaxed=relaxed.data.copy(),
            sampled=hard.copy(),
            hard=hard,
            noise=zero,
            relaxed_tensor=relaxed if relaxed.requires_grad else None,
        )

    if noise is None:
        if rng is None:
            raise ValueError("explore mode needs a random generator or explicit noise")
        noise = rng.gumbel(size=num_features)
    relaxed = F.sigmoid(F.mul(F.add(F.log(p), Tensor(noise)), 1.0 / config.temperature))
    sampled = round_half_up(relaxed.data)
    return FeatureSample(
        probs=p.data.copy(),
        relaxed=relaxed.data.copy(),
        sampled=sampled,
        hard=truncate_to_budget(sampled, relaxed.data, beta_f),
        noise=np.asarray(noise, dtype=np.float64).copy(),
        relaxed_tensor=relaxed if relaxed.requires_grad else None,
    )
