"""Adam optimizer over named tensors."""

import logging
from collections.abc import Sequence

import numpy as np

from ga2c.autodiff.tensor import Tensor
from ga2c.utils.errors import NumericalError

logger = logging.getLogger(__name__)


class Adam:
    """Adam with bias correction and optional L2 weight decay.

    Weight decay is added to the gradient (``g + wd * w``) before the moment
    updates, matching the L2-regularised loss the GCN convention uses.

    Attributes:
        params: Tensors updated in place.
        step_count: Number of completed steps.
    """

    def __init__(
        self,
        params: Sequence[Tensor],
        lr: float = 1e-3,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ):
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self._m = [np.zeros_like(p.data) for p in self.params]
        self._v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        """Apply one update from the gradients currently stored on the params.

        Parameters without a gradient are treated as having a zero gradient.

        Raises:
            NumericalError: If any gradient holds NaN or infinity. No
                parameter is modified in that case.
        """
        grads = []
        for p in self.params:
            g = np.zeros_like(p.data) if p.grad is None else p.grad
            if not np.all(np.isfinite(g)):
                raise NumericalError(f"non-finite gradient for parameter {p.name or '<unnamed>'}")
            if self.weight_decay:
                g = g + self.weight_decay * p.data
            grads.append(g)

        self.step_count += 1
        t = self.step_count
        correction1 = 1.0 - self.beta1**t
        correction2 = 1.0 - self.beta2**t
        for p, g, m, v in zip(self.params, grads, self._m, self._v, strict=True):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            m_hat = m / correction1
            v_hat = v / correction2
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
