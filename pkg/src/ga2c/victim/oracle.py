"""Query-only view of a victim handed to the attacker."""

from typing import Any

import numpy as np

from ga2c.graph.graph import AttackedGraph
from ga2c.utils.errors import BlackBoxViolationError
from ga2c.victim.handle import VictimHandle

# Names reachable on an oracle instance
QUERY_INTERFACE = frozenset(
    {"query", "target_loss", "clean_label", "num_classes", "query_count"}
)


class BlackBoxOracle:
    """Wraps a :class:`VictimHandle` and refuses every non-query attribute.

    Any attribute lookup outside :data:`QUERY_INTERFACE` raises
    :class:`BlackBoxViolationError`, including private ones such as the
    wrapped handle.
    """

    __slots__ = ("_handle",)

    def __init__(self, handle: VictimHandle):
        object.__setattr__(self, "_handle", handle)

    def __getattribute__(self, name: str) -> Any:
        if name in QUERY_INTERFACE:
            return object.__getattribute__(self, name)
        raise BlackBoxViolationError(f"'{name}' is not part of the victim query interface")

    def __setattr__(self, name: str, value: Any) -> None:
        raise BlackBoxViolationError(f"cannot set '{name}' on the victim oracle")

    def __repr__(self) -> str:
        return "BlackBoxOracle()"

    @property
    def num_classes(self) -> int:
        return object.__getattribute__(self, "_handle").num_classes

    @property
    def query_count(self) -> int:
        return object.__getattribute__(self, "_handle").query_count

    def query(self, v: int, g: AttackedGraph) -> np.ndarray:
        """Class probabilities of ``v`` on ``g``."""
        return object.__getattribute__(self, "_handle").query(v, g)

    def target_loss(self, v: int, g: AttackedGraph) -> float:
        """Cross-entropy of the query for ``v`` against its clean predicted label."""
        return object.__getattribute__(self, "_handle").target_loss(v, g)

    def clean_label(self, v: int) -> int:
        """Predicted label of ``v`` on the clean graph."""
        return object.__getattribute__(self, "_handle").clean_label(v)


def seal(handle: VictimHandle) -> BlackBoxOracle:
    """Return the attacker-facing view of ``handle``."""
    return BlackBoxOracle(handle)
