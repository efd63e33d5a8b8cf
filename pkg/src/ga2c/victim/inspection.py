"""Harness-only access to victim internals.

Nothing under ``ga2c.attacker`` or ``ga2c.training`` may import this module.
"""

from collections.abc import Sequence

import numpy as np

from ga2c.graph.graph import AttackedGraph
from ga2c.victim.handle import VictimHandle


def dump_embeddings(handle: VictimHandle, nodes: Sequence[int], g: AttackedGraph) -> np.ndarray:
    """Hidden (first-layer, post-ReLU) embeddings of ``nodes`` on ``g``.

    Returns:
        A len(nodes) × hidden matrix, one row per requested node.
    """
    ids = np.asarray([g.check_node(v) for v in nodes], dtype=np.int64)
    return handle.hidden_embeddings(g)[ids]
