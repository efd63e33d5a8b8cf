"""Budget sweeps: one evaluation per budget multiplier along one axis."""

import logging
from collections.abc import Sequence
from pathlib import Path

import pandas as pd

from ga2c.attacker.policy import PolicySet
from ga2c.graph.budget import AttackBudget, GraphStatistics, graph_statistics, round_budget
from ga2c.graph.graph import Graph
from ga2c.harness.evaluate import evaluate_attack
from ga2c.harness.experiment import BudgetAxis
from ga2c.models.report import AttackReport
from ga2c.utils.errors import ConfigurationError
from ga2c.utils.io import atomic_write_text
from ga2c.victim.handle import VictimHandle

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["axis", "multiplier", "beta_n", "beta_e", "beta_f", "attacked_accuracy"]


def swept_budget(
    base: AttackBudget, stats: GraphStatistics, axis: BudgetAxis, multiplier: float
) -> AttackBudget:
    """``base`` with one axis replaced by ``multiplier`` times its reference.

    The reference of β_n is 1 node; those of β_e and β_f are the dataset's
    average degree and average feature count.
    """
    if multiplier <= 0:
        raise ConfigurationError(f"Sweep multiplier must be positive, got {multiplier}")
    reference = {
        "beta_n": 1.0,
        "beta_e": stats.avg_degree,
        "beta_f": stats.avg_feature_sum,
    }[axis]
    return base.model_copy(update={axis: round_budget(multiplier * reference)})


def budget_sweep(
    policy: PolicySet,
    victim: VictimHandle,
    g: Graph,
    targets: Sequence[int],
    axis: BudgetAxis,
    multipliers: Sequence[float],
    seed: int,
    base: AttackBudget | None = None,
    out_csv: Path | None = None,
    workers: int = 1,
    show_progress: bool = False,
) -> list[AttackReport]:
    """Evaluate the attack at every multiplier of one budget axis.

    Budgets not swept stay at ``base`` (default β_n = 3 with average-based
    β_e and β_f). With ``out_csv`` a table of (axis, multiplier, budgets,
    attacked accuracy) is written.
    """
    if not multipliers:
        raise ConfigurationError("Sweep needs at least one multiplier")
    stats = graph_statistics(g)
    if base is None:
        base = AttackBudget(beta_n=3, beta_e=stats.degree_budget, beta_f=stats.feature_budget)

    reports: list[AttackReport] = []
    rows = []
    for multiplier in multipliers:
        budget = swept_budget(base, stats, axis, float(multiplier))
        logger.info(
            f"Sweep {axis} x{multiplier}: {budget.beta_n}/{budget.beta_e}/{budget.beta_f}",
            extra={"dataset": g.name},
        )
        report = evaluate_attack(
            policy, victim, g, targets, budget, seed, workers=workers, show_progress=show_progress
        )
        reports.append(report)
        rows.append(
            {
                "axis": axis,
                "multiplier": float(multiplier),
                **budget.model_dump(),
                "attacked_accuracy": report.attacked_accuracy,
            }
        )

    if out_csv is not None:
        table = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
        atomic_write_text(
            out_csv, table.to_csv(index=False, float_format="%.6f", lineterminator="\n")
        )
    return reports
