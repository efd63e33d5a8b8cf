"""Random baselines and their hybrids with the learned generator or sampler."""

from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ga2c.attacker.edges import EdgeChoice
from ga2c.attacker.episode import (
    EdgeStrategy,
    EpisodeTrajectory,
    FeatureStrategy,
    policy_edges,
    policy_features,
    run_episode,
)
from ga2c.attacker.policy import PolicySet
from ga2c.graph.budget import AttackBudget
from ga2c.graph.graph import AttackedGraph, Graph
from ga2c.harness.evaluate import attack_targets, check_compatible
from ga2c.models.report import AttackReport
from ga2c.utils.errors import ConfigurationError, NoCandidateError
from ga2c.victim.handle import VictimHandle
from ga2c.victim.oracle import BlackBoxOracle

BASELINE_VARIANTS = ("random", "node_plus_random", "random_plus_edge")


@dataclass(frozen=True, eq=False)
class RandomFeatures:
    hard: np.ndarray


def random_features(beta_f: int) -> FeatureStrategy:
    """Exactly ``beta_f`` distinct active features, uniformly at random."""

    def strategy(g: AttackedGraph, _v: int, rng: np.random.Generator) -> RandomFeatures:
        hard = np.zeros(g.num_features)
        active = rng.choice(g.num_features, size=min(beta_f, g.num_features), replace=False)
        hard[active] = 1.0
        return RandomFeatures(hard=hard)

    return strategy


def random_edges() -> EdgeStrategy:
    """Uniform over the target and its clean neighbours not yet wired to ``v_a``."""

    def strategy(g: AttackedGraph, v_a: int, v: int, rng: np.random.Generator) -> EdgeChoice:
        adj = g.base.adjacency
        pool = np.union1d([v], adj.indices[adj.indptr[v] : adj.indptr[v + 1]])
        pool = np.setdiff1d(pool, g.neighbors(v_a))
        if pool.size == 0:
            raise NoCandidateError(f"injected node {v_a} has no random candidate left")
        node = int(rng.choice(pool))
        return EdgeChoice(node=node, logprob=float(-np.log(pool.size)))

    return strategy


def baseline_random(
    victim: VictimHandle,
    g: Graph,
    targets: Sequence[int],
    budget: AttackBudget,
    variant: str,
    seed: int,
    policy: PolicySet | None = None,
    workers: int = 1,
    show_progress: bool = False,
    trace_path: Path | None = None,
) -> AttackReport:
    """Evaluate a random baseline with the same per-target protocol as the attack.

    ``random`` draws both features and wiring at random; ``node_plus_random``
    keeps the learned generator and wires at random; ``random_plus_edge``
    wires random nodes with the learned sampler. Learned parts run greedily.

    Raises:
        ConfigurationError: For an unknown variant, or a hybrid without a policy.
    """
    if variant not in BASELINE_VARIANTS:
        raise ConfigurationError(
            f"Unknown baseline {variant!r}; choose from {', '.join(BASELINE_VARIANTS)}"
        )
    if variant != "random" and policy is None:
        raise ConfigurationError(f"Baseline {variant!r} needs a trained policy")
    check_compatible(victim, g, policy)

    if variant == "node_plus_random":
        features, edges = policy_features(policy, budget, "greedy"), random_edges()
    elif variant == "random_plus_edge":
        features, edges = random_features(budget.beta_f), policy_edges(policy, budget, "greedy")
    else:
        features, edges = random_features(budget.beta_f), random_edges()

    def episode(oracle: BlackBoxOracle, v: int, rng: np.random.Generator) -> EpisodeTrajectory:
        return run_episode(
            None,
            oracle,
            g,
            v,
            budget,
            "greedy",
            rng,
            feature_strategy=features,
            edge_strategy=edges,
        )

    return attack_targets(
        victim,
        g,
        targets,
        budget,
        seed,
        episode,
        variant,
        workers=workers,
        show_progress=show_progress,
        trace_path=trace_path,
    )
