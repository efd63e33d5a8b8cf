"""Advantage actor-critic training of the attacker networks."""

from ga2c.training.buffer import ReplayBuffer, Transition, compute_returns
from ga2c.training.losses import feature_loss, policy_loss, value_loss
from ga2c.training.trainer import StepReport, TrainResult, train, train_step

__all__ = [
    "ReplayBuffer",
    "StepReport",
    "TrainResult",
    "Transition",
    "compute_returns",
    "feature_loss",
    "policy_loss",
    "train",
    "train_step",
    "value_loss",
]
