"""Hidden-embedding dump of one attacked target for external projection."""

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from ga2c.attacker.episode import EpisodeTrajectory, run_episode
from ga2c.attacker.policy import PolicySet
from ga2c.graph.budget import AttackBudget
from ga2c.graph.graph import AttackedGraph, Graph
from ga2c.harness.evaluate import check_compatible
from ga2c.utils.io import atomic_write_text
from ga2c.utils.seeding import derive_rng
from ga2c.victim.handle import VictimHandle
from ga2c.victim.inspection import dump_embeddings
from ga2c.victim.oracle import seal

logger = logging.getLogger(__name__)

ROLES = ("target_before", "target_after", "neighbor", "injected")


def embedding_table(
    victim: VictimHandle, g: Graph, target: int, attacked: AttackedGraph
) -> pd.DataFrame:
    """One row per (node, role) with the victim's hidden embedding.

    ``target_before`` is taken on the clean graph; ``target_after``, the
    target's clean neighbours and the injected nodes on ``attacked``.
    """
    clean = AttackedGraph.clean(g)
    neighbors = [int(u) for u in clean.neighbors(target)]
    injected = list(attacked.injected_ids())

    before = dump_embeddings(victim, [target], clean)
    after = dump_embeddings(victim, [target, *neighbors, *injected], attacked)
    nodes = [target, target, *neighbors, *injected]
    roles = ["target_before", "target_after"]
    roles += ["neighbor"] * len(neighbors) + ["injected"] * len(injected)

    values = np.vstack([before, after])
    table = pd.DataFrame(values, columns=[f"e{i}" for i in range(values.shape[1])])
    table.insert(0, "role", roles)
    table.insert(0, "node", nodes)
    return table


def case_study_dump(
    policy: PolicySet,
    victim: VictimHandle,
    g: Graph,
    target: int,
    budget: AttackBudget,
    out_path: Path,
    seed: int = 0,
) -> EpisodeTrajectory:
    """Attack ``target`` with one greedy episode and write its embedding CSV.

    Returns:
        The episode, so callers can report whether the flip succeeded.
    """
    check_compatible(victim, g, policy)
    trajectory = run_episode(
        policy, seal(victim), g, target, budget, "greedy", derive_rng(seed, target)
    )
    table = embedding_table(victim, g, trajectory.target, trajectory.final_graph)
    atomic_write_text(
        out_path, table.to_csv(index=False, float_format="%.8f", lineterminator="\n")
    )
    logger.info(
        f"Wrote {len(table)} embedding rows for target {target} "
        f"(flipped: {trajectory.success}) to {out_path}",
        extra={"target": target, "dataset": g.name},
    )
    return trajectory
