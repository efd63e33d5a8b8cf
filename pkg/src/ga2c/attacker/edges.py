"""Edge sampler: where an injected node should be wired."""

from dataclasses import dataclass

import numpy as np

from ga2c.attacker.policy import PolicySet
from ga2c.autodiff import Tensor
from ga2c.autodiff import functional as F
from ga2c.graph.graph import AttackedGraph
from ga2c.utils.errors import ConstraintError, NoCandidateError


@dataclass(frozen=True, eq=False)
class EdgeDistribution:
    """Categorical distribution over wiring candidates of one injected node.

    Attributes:
        probs: Probability per node id of the attacked graph; masked nodes are 0.
        logits: Masked logits (-inf where masked), on the tape when recording.
    """

    probs: np.ndarray
    logits: Tensor

    def log_prob(self, node: int) -> Tensor:
        """log p(node) as a differentiable scalar."""
        return F.mul(F.log_softmax_nll(self.logits, node), -1.0)


@dataclass(frozen=True)
class EdgeChoice:
    node: int
    logprob: float


def candidate_mask(g: AttackedGraph, v_a: int, max_degree: int | None = None) -> np.ndarray:
    """Additive mask: 0 for wireable nodes, -inf for ``v_a`` and its neighbours.

    With ``max_degree``, other injected nodes that already have that many
    edges are masked too.
    """
    mask = np.zeros(g.num_nodes)
    mask[v_a] = -np.inf
    mask[g.neighbors(v_a)] = -np.inf
    if max_degree is not None:
        for u in g.injected_ids():
            if g.degree(u) >= max_degree:
                mask[u] = -np.inf
    return mask


def edge_logits(
    policy: PolicySet,
    g: AttackedGraph,
    v_a: int,
    target: int,
    injected_rows: Tensor | None = None,
) -> Tensor:
    """Unmasked logits Z_e W_e + A'(target) over every node of ``g``.

    Args:
        injected_rows: Feature rows of all injected nodes of ``g`` in id
            order. When they are straight-through samples, gradients reach
            the node generator. Defaults to the constant rows of ``g``.
    """
    d = policy.config.hidden
    n_clean = g.base.num_nodes
    if injected_rows is None:
        injected_rows = Tensor(g.injected_block().toarray())
    h = policy.edge_stack.forward(g.normalized_adjacency, g.base.features, injected_rows)

    w_h = F.index(policy.w_edge, np.arange(d))
    w_x = F.index(policy.w_edge, np.arange(d, policy.w_edge.shape[0]))
    scores = F.reshape(F.matmul(h, w_h), (g.num_nodes,))
    # Shared by every candidate; constant under the softmax
    x_a = F.index(injected_rows, v_a - n_clean)
    scores = F.add(scores, F.reshape(F.matmul(x_a, w_x), ()))
    if policy.config.edge_prior:
        prior = np.zeros(g.num_nodes)
        prior[g.neighbors(target)] = 1.0
        scores = F.add(scores, Tensor(prior))
    return scores


def edge_distribution(
    policy: PolicySet,
    g: AttackedGraph,
    v_a: int,
    target: int,
    injected_rows: Tensor | None = None,
    max_degree: int | None = None,
) -> EdgeDistribution:
    """Wiring distribution for injected node ``v_a`` attacking ``target``.

    ``max_degree`` (the degree budget) excludes injected nodes with no
    degree left.

    Raises:
        ConstraintError: If ``v_a`` is not an injected node.
        NoCandidateError: If every node is masked.
    """
    v_a = g.check_node(v_a)
    if not g.is_injected(v_a):
        raise ConstraintError(f"node {v_a} is not an injected node")
    mask = candidate_mask(g, v_a, max_degree)
    if np.all(np.isneginf(mask)):
        raise NoCandidateError(f"injected node {v_a} has no candidate left")
    logits = F.add(edge_logits(policy, g, v_a, target, injected_rows), Tensor(mask))
    probs = F.softmax_row(logits)
    return EdgeDistribution(probs=probs.data.copy(), logits=logits)


def sample_edge(
    dist: EdgeDistribution | np.ndarray,
    rng: np.random.Generator | None = None,
    greedy: bool = False,
) -> EdgeChoice:
    """Draw a node from the distribution, or take its argmax when ``greedy``.

    Raises:
        NoCandidateError: If the distribution has no positive entry.
    """
    if isinstance(dist, EdgeDistribution):
        probs = dist.probs
    else:
        probs = np.asarray(dist, dtype=np.float64)
    total = probs.sum()
    if probs.size == 0 or total <= 0.0:
        raise NoCandidateError("edge distribution has no positive entry")
    if greedy:
        node = int(np.argmax(probs))
    else:
        if rng is None:
            raise ValueError("sampling needs a random generator")
        node = int(rng.choice(probs.size, p=probs / total))
    return EdgeChoice(node=node, logprob=float(np.log(probs[node])))
