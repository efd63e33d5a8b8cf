"""Minimal reverse-mode differentiation over numpy arrays."""

from ga2c.autodiff.optim import Adam
from ga2c.autodiff.tensor import ComputationTape, Tensor, is_grad_enabled, no_grad

__all__ = [
    "Adam",
    "ComputationTape",
    "Tensor",
    "is_grad_enabled",
    "no_grad",
]
