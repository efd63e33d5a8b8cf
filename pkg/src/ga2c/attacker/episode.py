"""Attack episodes: alternate node generation and edge wiring around one target."""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Literal, Protocol

import numpy as np

from ga2c.attacker.edges import EdgeChoice, edge_distribution, sample_edge
from ga2c.attacker.generator import FeatureSample, generate_node
from ga2c.attacker.policy import PolicySet
from ga2c.attacker.reward import RewardKind, reward_from_losses
from ga2c.attacker.value import value_from_probs
from ga2c.autodiff import no_grad
from ga2c.autodiff import functional as F
from ga2c.graph.budget import AttackBudget
from ga2c.graph.graph import AttackedGraph, Graph
from ga2c.models.events import EdgeTraceRecord, NodeTraceRecord, TraceRecord
from ga2c.utils.errors import NoCandidateError

if TYPE_CHECKING:
    from ga2c.victim.oracle import BlackBoxOracle

logger = logging.getLogger(__name__)

Mode = Literal["explore", "greedy"]


class HasHardFeatures(Protocol):
    hard: np.ndarray


FeatureStrategy = Callable[[AttackedGraph, int, np.random.Generator], HasHardFeatures]
EdgeStrategy = Callable[[AttackedGraph, int, int, np.random.Generator], EdgeChoice]


@dataclass(frozen=True, eq=False)
class NodeStep:
    """Injection of one adversarial node.

    Attributes:
        state: Overlay before the injection.
        node: Id given to the injected node.
        sample: Feature sample the node was built from.
    """

    state: AttackedGraph
    node: int
    sample: HasHardFeatures


@dataclass(frozen=True, eq=False)
class EdgeStep:
    """Wiring of one edge from an injected node, with its reward.

    Attributes:
        state: Overlay before the wiring (the injected node already present).
        injected: The injected node the edge starts at.
        chosen: The node it was wired to.
        logprob: log p(chosen) under the sampler at rollout time.
        value: Value prediction for ``state`` (NaN without a policy).
        probs_before: Victim answer for the target on ``state``.
        loss_before: Target loss on ``state``.
        loss_after: Target loss after the wiring.
        reward: Reward including ``bonus``.
        bonus: Terminal flip bonus included in ``reward``.
        flipped: Whether the wiring flipped the target's prediction.
    """

    state: AttackedGraph
    injected: int
    chosen: int
    logprob: float
    value: float
    probs_before: np.ndarray
    loss_before: float
    loss_after: float
    reward: float
    bonus: float
    flipped: bool


@dataclass(eq=False)
class EpisodeTrajectory:
    """Everything one attack episode produced."""

    target: int
    clean_label: int
    steps: list[NodeStep | EdgeStep] = field(default_factory=list)
    success: bool = False
    final_graph: AttackedGraph | None = None
    initial_loss: float = 0.0
    final_loss: float = 0.0
    final_probs: np.ndarray | None = None
    queries: int = 0

    @property
    def node_steps(self) -> list[NodeStep]:
        return [s for s in self.steps if isinstance(s, NodeStep)]

    @property
    def edge_steps(self) -> list[EdgeStep]:
        return [s for s in self.steps if isinstance(s, EdgeStep)]

    @property
    def rewards(self) -> list[float]:
        return [s.reward for s in self.edge_steps]

    def attacked_label(self) -> int:
        if self.final_probs is None:
            return self.clean_label
        return int(np.argmax(self.final_probs))

    def trace_records(self) -> list[TraceRecord]:
        """One JSON-lines record per step."""
        records: list[TraceRecord] = []
        for step in self.steps:
            if isinstance(step, NodeStep):
                records.append(
                    NodeTraceRecord(
                        target=self.target,
                        chosen=step.node,
                        active_features=np.flatnonzero(step.sample.hard).tolist(),
                    )
                )
            else:
                records.append(
                    EdgeTraceRecord(
                        target=self.target,
                        injected=step.injected,
                        chosen=step.chosen,
                        reward=step.reward,
                        value=None if math.isnan(step.value) else step.value,
                        loss_before=step.loss_before,
                        loss_after=step.loss_after,
                    )
                )
        return records


def policy_features(policy: PolicySet, target_budget: AttackBudget, mode: Mode) -> FeatureStrategy:
    """Feature strategy backed by the node generator."""

    def strategy(g: AttackedGraph, v: int, rng: np.random.Generator) -> FeatureSample:
        return generate_node(policy, g, v, target_budget.beta_f, rng=rng, mode=mode)

    return strategy


def policy_edges(policy: PolicySet, target_budget: AttackBudget, mode: Mode) -> EdgeStrategy:
    """Edge strategy backed by the edge sampler."""

    def strategy(g: AttackedGraph, v_a: int, v: int, rng: np.random.Generator) -> EdgeChoice:
        dist = edge_distribution(policy, g, v_a, v, max_degree=target_budget.beta_e)
        return sample_edge(dist, rng, greedy=mode == "greedy")

    return strategy


def run_episode(
    policy: PolicySet | None,
    victim: "BlackBoxOracle",
    g_clean: Graph,
    v: int,
    budget: AttackBudget,
    mode: Mode,
    rng: np.random.Generator,
    feature_strategy: FeatureStrategy | None = None,
    edge_strategy: EdgeStrategy | None = None,
    reward_kind: RewardKind | None = None,
    terminal_bonus: float | None = None,
) -> EpisodeTrajectory:
    """Attack target ``v`` on a fresh overlay of ``g_clean``.

    Each of the ``beta_n`` injections is followed by up to ``beta_e``
    wirings. The victim is queried once up front and once per wiring; the
    episode ends as soon as the target's predicted label leaves its clean
    label. A node with no wireable candidate left stops wiring early.

    Strategies default to the policy's generator and sampler; baselines
    pass their own. Value predictions are recorded only with a policy.
    """
    if policy is None and (feature_strategy is None or edge_strategy is None):
        raise ValueError("run_episode needs a policy or both strategies")
    config = policy.config if policy is not None else None
    reward_kind = reward_kind or (config.reward if config else "loss")
    if terminal_bonus is None:
        terminal_bonus = config.terminal_bonus if config else 1.0
    features = feature_strategy or policy_features(policy, budget, mode)
    edges = edge_strategy or policy_edges(policy, budget, mode)

    g = AttackedGraph.clean(g_clean)
    v = g.check_node(v)
    label = victim.clean_label(v)
    probs = victim.query(v, g)
    loss = F.loss_from_probs(probs, label)
    trajectory = EpisodeTrajectory(target=v, clean_label=label, initial_loss=loss)
    trajectory.queries = 1

    with no_grad():
        for i in range(budget.beta_n):
            sample = features(g, v, rng)
            state = g
            g, v_a = g.inject(sample.hard)
            trajectory.steps.append(NodeStep(state=state, node=v_a, sample=sample))

            for j in range(budget.beta_e):
                value = math.nan
                if policy is not None:
                    value = value_from_probs(policy, v, g, probs, label).item()
                try:
                    choice = edges(g, v_a, v, rng)
                except NoCandidateError:
                    logger.debug(
                        f"Injected node {v_a} has no candidate left",
                        extra={"target": v},
                    )
                    break
                g_next = g.wire(v_a, choice.node)
                probs_next = victim.query(v, g_next)
                trajectory.queries += 1
                loss_next = F.loss_from_probs(probs_next, label)
                flipped = int(np.argmax(probs_next)) != label
                last = i == budget.beta_n - 1 and j == budget.beta_e - 1
                reward, bonus = reward_from_losses(
                    loss,
                    loss_next,
                    terminal=flipped or last,
                    flipped=flipped,
                    bonus=terminal_bonus,
                    kind=reward_kind,
                )
                trajectory.steps.append(
                    EdgeStep(
                        state=g,
                        injected=v_a,
                        chosen=choice.node,
                        logprob=choice.logprob,
                        value=value,
                        probs_before=probs,
                        loss_before=loss,
                        loss_after=loss_next,
                        reward=reward,
                        bonus=bonus,
                        flipped=flipped,
                    )
                )
                g, probs, loss = g_next, probs_next, loss_next
                if flipped:
                    trajectory.success = True
                    break
            if trajectory.success:
                break

    trajectory.final_graph = g
    trajectory.final_loss = loss
    trajectory.final_probs = probs
    return trajectory
