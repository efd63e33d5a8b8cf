"""Actor-critic losses: policy, value and feature-budget terms."""

from ga2c.attacker.generator import FeatureSample
from ga2c.autodiff import Tensor
from ga2c.autodiff import functional as F


def _constant(x: Tensor | float) -> float:
    return float(x.data) if isinstance(x, Tensor) else float(x)


def policy_loss(logprob: Tensor, ret: float, value: Tensor | float) -> Tensor:
    """-log p(a) * (R - V), with the advantage held constant."""
    advantage = ret - _constant(value)
    return F.mul(logprob, -advantage)


def value_loss(value: Tensor, ret: float) -> Tensor:
    """|V - R|; the subgradient at equality is 0."""
    return F.abs(F.sub(value, ret))


def feature_loss(sample: FeatureSample | Tensor, beta_f: int) -> Tensor:
    """(sum of active features - beta_f)^2.

    A :class:`FeatureSample` contributes its sampled row before the budget
    cut, on the straight-through path, so the penalty pushes the generator
    towards exactly ``beta_f`` active entries.
    """
    row = sample.straight_through_sampled() if isinstance(sample, FeatureSample) else sample
    return F.square(F.sub(F.sum(row), float(beta_f)))
