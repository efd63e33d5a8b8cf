"""One-command experiment runs: victim, attacker, evaluations, sweeps, summary."""

import logging
import platform
import time
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import TypeVar

import pandas as pd

from ga2c import __version__
from ga2c.attacker.policy import PolicySet, load_policy, save_policy
from ga2c.config import Settings
from ga2c.graph.budget import AttackBudget, graph_statistics
from ga2c.graph.datasets import load_dataset, locate_dataset
from ga2c.graph.graph import Graph
from ga2c.harness.baselines import baseline_random
from ga2c.harness.evaluate import evaluate_attack
from ga2c.harness.experiment import ExperimentConfig, resolve_budgets, select_targets
from ga2c.harness.sweep import budget_sweep
from ga2c.models.report import AttackReport
from ga2c.training.trainer import train
from ga2c.utils.errors import StageError, log_error
from ga2c.utils.io import atomic_write_json, atomic_write_text
from ga2c.utils.logging import run_id_var
from ga2c.utils.seeding import derive_rng
from ga2c.victim.handle import VictimHandle, load_victim, save_victim, train_victim
from ga2c.victim.oracle import seal

logger = logging.getLogger(__name__)

T = TypeVar("T")

SUMMARY_COLUMNS = [
    "dataset",
    "method",
    "beta_n",
    "beta_e",
    "beta_f",
    "num_targets",
    "num_seeds",
    "clean_accuracy",
    "attacked_accuracy",
    "attacked_accuracy_std",
]

# Sub-stream key for policy initialisation
POLICY_INIT_STREAM = 11

_VERSIONED_PACKAGES = ("numpy", "scipy", "pandas", "pydantic", "pydantic-settings", "tqdm")


@dataclass
class ManifestResult:
    """Reports of a manifest run keyed by seed, plus the summary tables."""

    out_dir: Path
    reports: dict[int, list[AttackReport]] = field(default_factory=dict)
    sweeps: dict[int, dict[str, list[AttackReport]]] = field(default_factory=dict)
    summary: pd.DataFrame | None = None
    accuracy: pd.DataFrame | None = None


@contextmanager
def _stage(name: str, **context) -> Iterator[None]:
    start = time.perf_counter()
    logger.info(f"Stage {name} started", extra={"stage": name, **context})
    try:
        yield
    except Exception as e:
        error = StageError(name, e)
        log_error(error, stage=name, **context)
        raise error from e
    logger.info(
        f"Stage {name} finished",
        extra={
            "stage": name,
            "duration_ms": round((time.perf_counter() - start) * 1000, 2),
            **context,
        },
    )


def _run_stage(name: str, fn: Callable[[], T], **context) -> T:
    with _stage(name, **context):
        return fn()


def _package_versions() -> dict[str, str]:
    versions = {"ga2c": __version__, "python": platform.python_version()}
    for name in _VERSIONED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def summary_table(reports: list[AttackReport]) -> pd.DataFrame:
    """Mean attacked accuracy per (method, budget) over seeds, in a fixed order.

    Wall times and run ids are left out so identical runs give identical tables.
    """
    rows = [
        {
            "dataset": r.dataset,
            "method": r.method,
            "beta_n": r.budget.beta_n,
            "beta_e": r.budget.beta_e,
            "beta_f": r.budget.beta_f,
            "num_targets": r.num_targets,
            "seed": r.seed,
            "clean_accuracy": r.clean_accuracy,
            "attacked_accuracy": r.attacked_accuracy,
        }
        for r in reports
    ]
    if not rows:
        return pd.DataFrame(columns=SUMMARY_COLUMNS)
    frame = pd.DataFrame(rows)
    keys = ["dataset", "method", "beta_n", "beta_e", "beta_f", "num_targets"]
    grouped = frame.groupby(keys, sort=True)
    summary = grouped.agg(
        num_seeds=("seed", "nunique"),
        clean_accuracy=("clean_accuracy", "mean"),
        attacked_accuracy=("attacked_accuracy", "mean"),
        attacked_accuracy_std=("attacked_accuracy", lambda s: float(s.std(ddof=0))),
    ).reset_index()
    return summary[SUMMARY_COLUMNS]


def accuracy_table(reports: list[AttackReport]) -> pd.DataFrame:
    """Mean attacked accuracy with one row per (dataset, method) and one column per beta_n.

    Columns are named ``beta_n=<k>`` in increasing order; a method not run
    at some beta_n leaves that cell empty.
    """
    summary = summary_table(reports)
    if summary.empty:
        return pd.DataFrame(columns=["dataset", "method"])
    table = summary.pivot_table(
        index=["dataset", "method"],
        columns="beta_n",
        values="attacked_accuracy",
        aggfunc="mean",
    )
    table.columns = [f"beta_n={int(k)}" for k in table.columns]
    return table.reset_index()


def _victim_for_seed(
    config: ExperimentConfig, settings: Settings, g: Graph, seed: int, seed_dir: Path
) -> VictimHandle:
    if config.victim_checkpoint is not None:
        return load_victim(config.victim_checkpoint, g)
    handle = train_victim(g, settings.victim, seed=seed)
    save_victim(handle, seed_dir / "victim.json")
    return handle


def _policy_for_seed(
    config: ExperimentConfig,
    settings: Settings,
    g: Graph,
    victim: VictimHandle,
    budget: AttackBudget,
    seed: int,
    seed_dir: Path,
) -> PolicySet:
    if config.policy_checkpoint is not None:
        return load_policy(config.policy_checkpoint, g.num_features, g.num_classes)
    policy = PolicySet(
        g.num_features,
        g.num_classes,
        settings.attacker,
        rng=derive_rng(seed, POLICY_INIT_STREAM),
    )
    train_targets = select_targets(g, config.train_targets, seed)
    result = train(
        policy,
        seal(victim),
        g,
        train_targets,
        settings.training.model_copy(update={"seed": seed}),
        budget,
        metrics_path=seed_dir / "metrics.jsonl",
        workers=settings.evaluation.workers,
        show_progress=settings.evaluation.show_progress,
    )
    save_policy(
        result.policy,
        seed_dir / "policy.json",
        metadata={
            "dataset": g.name,
            "seed": seed,
            "best_epoch": result.best_epoch,
            "best_success_rate": result.best_success_rate,
            **budget.model_dump(),
        },
    )
    return result.policy


def run_manifest(config: ExperimentConfig, settings: Settings) -> ManifestResult:
    """Run every stage of ``config`` for each seed and persist the artifacts.

    Per seed, under ``<out_dir>/seed_<s>/``: the victim and policy
    checkpoints (unless given), the training metrics stream, one report per
    method and one CSV per sweep. At the top level: ``summary.csv`` and
    ``run_info.json``, plus ``accuracy_table.csv`` with one column per
    beta_n (the main budget and any beta_n sweep).

    Raises:
        ConfigurationError: If an input path is missing; nothing is run.
        StageError: If a stage fails; outputs written so far are kept.
    """
    config.validate_paths()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    g = _run_stage(
        "load-dataset",
        lambda: load_dataset(locate_dataset(config.dataset, config.data_dir)),
        dataset=config.dataset,
    )
    stats = graph_statistics(g)
    budget = resolve_budgets(stats, config.beta_n, config.beta_e, config.beta_f)
    targets = select_targets(g, config.targets, config.seeds[0])

    atomic_write_json(
        out_dir / "run_info.json",
        {
            "run_id": run_id_var.get(),
            "versions": _package_versions(),
            "seeds": config.seeds,
            "budget": budget.model_dump(),
            "num_targets": int(targets.size),
            "statistics": stats.model_dump(),
            "config": config.model_dump(mode="json"),
            "settings": {
                "victim": settings.victim.model_dump(),
                "attacker": settings.attacker.model_dump(),
                "training": settings.training.model_dump(),
            },
        },
    )

    result = ManifestResult(out_dir=out_dir)
    workers = settings.evaluation.workers
    progress = settings.evaluation.show_progress
    for seed in config.seeds:
        seed_dir = out_dir / f"seed_{seed}"
        context = {"dataset": g.name, "seed": seed}
        victim = _run_stage(
            "train-victim",
            lambda seed=seed, seed_dir=seed_dir: _victim_for_seed(
                config, settings, g, seed, seed_dir
            ),
            **context,
        )
        policy: PolicySet | None = None
        if any(m != "random" for m in config.methods) or config.sweeps:
            policy = _run_stage(
                "attack-train",
                lambda seed=seed, seed_dir=seed_dir, victim=victim: _policy_for_seed(
                    config, settings, g, victim, budget, seed, seed_dir
                ),
                **context,
            )

        reports: list[AttackReport] = []
        with _stage("evaluate", **context):
            for method in config.methods:
                if method == "ga2c":
                    report = evaluate_attack(
                        policy,
                        victim,
                        g,
                        targets,
                        budget,
                        seed,
                        workers=workers,
                        show_progress=progress,
                    )
                else:
                    report = baseline_random(
                        victim,
                        g,
                        targets,
                        budget,
                        method,
                        seed,
                        policy=policy,
                        workers=workers,
                        show_progress=progress,
                    )
                atomic_write_json(seed_dir / f"report_{method}.json", report)
                reports.append(report)
        result.reports[seed] = reports

        if config.sweeps:
            with _stage("sweep", **context):
                result.sweeps[seed] = {}
                for sweep in config.sweeps:
                    result.sweeps[seed][sweep.axis] = budget_sweep(
                        policy,
                        victim,
                        g,
                        targets,
                        sweep.axis,
                        sweep.multipliers,
                        seed,
                        base=budget,
                        out_csv=seed_dir / f"sweep_{sweep.axis}.csv",
                        workers=workers,
                        show_progress=progress,
                    )

    all_reports = [r for reports in result.reports.values() for r in reports]
    result.summary = summary_table(all_reports)
    atomic_write_text(
        out_dir / "summary.csv",
        result.summary.to_csv(index=False, float_format="%.6f", lineterminator="\n"),
    )
    beta_n_reports = [r for sweeps in result.sweeps.values() for r in sweeps.get("beta_n", [])]
    result.accuracy = accuracy_table(all_reports + beta_n_reports)
    atomic_write_text(
        out_dir / "accuracy_table.csv",
        result.accuracy.to_csv(index=False, float_format="%.6f", lineterminator="\n"),
    )
    logger.info(f"Summary written to {out_dir / 'summary.csv'}", extra={"dataset": g.name})
    return result
