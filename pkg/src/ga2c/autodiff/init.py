"""Weight initialisation."""

import numpy as np

from ga2c.autodiff.tensor import Tensor


def glorot_uniform(
    shape: tuple[int, int],
    rng: np.random.Generator,
    name: str | None = None,
) -> Tensor:
    """Trainable weight drawn from U(-r, r) with r = sqrt(6 / (fan_in + fan_out))."""
    fan_in, fan_out = shape
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-limit, limit, size=shape), requires_grad=True, name=name)

