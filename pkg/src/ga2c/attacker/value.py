"""Value predictor: expected return of an intermediate attacked graph."""

from typing import TYPE_CHECKING

import numpy as np

from ga2c.attacker.policy import PolicySet
from ga2c.autodiff import Tensor
from ga2c.autodiff import functional as F
from ga2c.graph.graph import AttackedGraph
from ga2c.graph.subgraph import k_order_subgraph

if TYPE_CHECKING:
    from ga2c.victim.oracle import BlackBoxOracle


def value_from_probs(
    policy: PolicySet,
    v: int,
    g: AttackedGraph,
    probs: np.ndarray,
    clean_label: int,
) -> Tensor:
    """NLL of log-softmax((H[v] ∥ probs) W_v) against ``clean_label``.

    ``probs`` is the victim's answer for ``v`` on ``g``, so callers holding
    it already avoid a second query.
    """
    sub = k_order_subgraph(g, v, policy.config.num_layers)
    h = policy.value_stack.forward(sub.normalized_adjacency, sub.features)
    joint = F.concat([F.index(h, sub.center), Tensor(probs)])
    return F.log_softmax_nll(F.matmul(joint, policy.w_value), clean_label)


def predict_value(
    policy: PolicySet,
    victim: "BlackBoxOracle",
    v: int,
    g: AttackedGraph,
) -> Tensor:
    """Predicted return for target ``v`` on ``g``; queries the victim once."""
    return value_from_probs(policy, v, g, victim.query(v, g), victim.clean_label(v))
