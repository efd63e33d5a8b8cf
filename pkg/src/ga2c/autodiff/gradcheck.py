"""Finite-difference gradient checks."""

from collections.abc import Callable, Sequence

import numpy as np

from ga2c.autodiff.tensor import Tensor, no_grad


def numerical_gradient(
    fn: Callable[[], Tensor],
    tensor: Tensor,
    eps: float = 1e-5,
) -> np.ndarray:
    """Central differences of the scalar ``fn()`` with respect to ``tensor``.

    ``tensor.data`` is perturbed in place and restored afterwards.
    """
    grad = np.zeros_like(tensor.data)
    flat = tensor.data.reshape(-1)
    out = grad.reshape(-1)
    with no_grad():
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + eps
            plus = fn().item()
            flat[i] = original - eps
            minus = fn().item()
            flat[i] = original
            out[i] = (plus - minus) / (2.0 * eps)
    return grad


def check_gradients(
    fn: Callable[[], Tensor],
    inputs: Sequence[Tensor],
    eps: float = 1e-5,
    rtol: float = 1e-4,
    atol: float = 1e-6,
) -> bool:
    """Compare backward() gradients of ``fn`` with central differences.

    Entries whose absolute difference is below ``atol`` always pass, so
    near-zero gradients do not fail on round-off.
    """
    for t in inputs:
        t.zero_grad()
    fn().backward()
    for t in inputs:
        analytic = np.zeros_like(t.data) if t.grad is None else t.grad.copy()
        numeric = numerical_gradient(fn, t, eps)
        close = np.abs(analytic - numeric) <= atol + rtol * np.maximum(
            np.abs(analytic), np.abs(numeric)
        )
        if not np.all(close):
            return False
    return True
