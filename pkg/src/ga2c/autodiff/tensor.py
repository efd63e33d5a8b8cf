"""Dense float64 tensors with a reverse-mode computation tape."""

from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Any

import numpy as np

# Per-thread (per-context) switch; rollouts disable recording
_grad_enabled: ContextVar[bool] = ContextVar("grad_enabled", default=True)

BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]


def is_grad_enabled() -> bool:
    """Return whether new operations are recorded for differentiation."""
    return _grad_enabled.get()


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable tape recording inside the block."""
    token = _grad_enabled.set(False)
    try:
        yield
    finally:
        _grad_enabled.reset(token)


class Tensor:
    """A dense float64 array that can take part in reverse-mode differentiation.

    Leaves created by the user hold ``requires_grad=True`` when they are
    trainable. Results of primitive operations keep references to their
    operands and a closure mapping the output gradient to operand gradients.
    """

    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward", "_op")

    def __init__(
        self,
        data: Any,
        requires_grad: bool = False,
        name: str | None = None,
    ):
        self.data: np.ndarray = np.array(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents: tuple[Tensor, ...] = ()
        self._backward: BackwardFn | None = None
        self._op = ""

    @classmethod
    def from_op(
        cls,
        data: np.ndarray,
        parents: Sequence["Tensor"],
        backward: BackwardFn,
        op: str,
    ) -> "Tensor":
        """Create the result of a primitive operation.

        The result is attached to the tape only when recording is enabled
        and at least one operand requires a gradient.
        """
        out = cls.__new__(cls)
        out.data = np.asarray(data, dtype=np.float64)
        out.grad = None
        out.name = None
        out._op = op
        if is_grad_enabled() and any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = tuple(parents)
            out._backward = backward
        else:
            out.requires_grad = False
            out._parents = ()
            out._backward = None
        return out

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def op(self) -> str:
        return self._op

    def item(self) -> float:
        """Return the value of a single-element tensor as a float."""
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float("nan")

    def numpy(self) -> np.ndarray:
        """Return a copy of the values."""
        return self.data.copy()

    def detach(self) -> "Tensor":
        """Return a constant tensor sharing no tape with this one."""
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self, grad: np.ndarray | float | None = None) -> None:
        """Back-propagate from this tensor through the recorded operations.

        Args:
            grad: Seed gradient. Defaults to 1 for single-element tensors.
        """
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without a seed gradient needs a scalar tensor")
            grad = np.ones_like(self.data)
        ComputationTape.from_root(self).replay(np.broadcast_to(grad, self.shape).astype(np.float64))

    # Operators delegate to the functional primitives
    def __add__(self, other: Any) -> "Tensor":
        from ga2c.autodiff import functional as F

        return F.add(self, other)

    def __radd__(self, other: Any) -> "Tensor":
        from ga2c.autodiff import functional as F

        return F.add(other, self)

    def __sub__(self, other: Any) -> "Tensor":
        from ga2c.autodiff import functional as F

        return F.sub(self, other)

    def __rsub__(self, other: Any) -> "Tensor":
        from ga2c.autodiff import functional as F

        return F.sub(other, self)

    def __mul__(self, other: Any) -> "Tensor":
        from ga2c.autodiff import functional as F

        return F.mul(self, other)

    def __rmul__(self, other: Any) -> "Tensor":
        from ga2c.autodiff import functional as F

        return F.mul(other, self)

    def __neg__(self) -> "Tensor":
        from ga2c.autodiff import functional as F

        return F.mul(self, -1.0)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from ga2c.autodiff import functional as F

        return F.matmul(self, other)

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})"


class ComputationTape:
    """Operations reachable from a root, in topological order (root last)."""

    def __init__(self, nodes: list[Tensor]):
        self.nodes = nodes

    @classmethod
    def from_root(cls, root: Tensor) -> "ComputationTape":
        """Collect every differentiable node the root depends on."""
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        return cls(order)

    def __len__(self) -> int:
        return len(self.nodes)

    def replay(self, seed: np.ndarray) -> None:
        """Visit each node once in reverse order, accumulating gradients.

        Leaf gradients add onto any gradient already stored; intermediate
        nodes receive the gradient of this pass only.
        """
        if not self.nodes:
            return
        pending: dict[int, np.ndarray] = {id(self.nodes[-1]): seed}
        for node in reversed(self.nodes):
            g = pending.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                node.grad = g.copy() if node.grad is None else node.grad + g
                continue
            node.grad = g
            for parent, parent_grad in zip(node._parents, node._backward(g), strict=True):
                if parent_grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in pending:
                    pending[key] = pending[key] + parent_grad
                else:
                    pending[key] = np.asarray(parent_grad, dtype=np.float64)
