"""Command-line entry point: ``ga2c <command> [options]``."""

import argparse
import json
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

from ga2c import __version__
from ga2c.attacker.policy import PolicySet, load_policy, save_policy
from ga2c.config import Settings, get_settings
from ga2c.graph.budget import AttackBudget, graph_statistics
from ga2c.graph.datasets import DOWNLOADABLE_DATASETS, fetch_dataset, load_dataset, locate_dataset
from ga2c.graph.graph import Graph
from ga2c.harness.baselines import BASELINE_VARIANTS, baseline_random
from ga2c.harness.case_study import case_study_dump
from ga2c.harness.evaluate import evaluate_attack
from ga2c.harness.experiment import load_experiment_config, resolve_budgets, select_targets
from ga2c.harness.manifest import POLICY_INIT_STREAM, run_manifest
from ga2c.harness.sweep import budget_sweep
from ga2c.models.report import AttackReport
from ga2c.training.trainer import train
from ga2c.utils.errors import EXIT_OK, ConfigurationError, exit_code_for, log_error
from ga2c.utils.io import atomic_write_json
from ga2c.utils.logging import configure_logging, run_context
from ga2c.utils.seeding import derive_rng
from ga2c.victim.handle import VictimHandle, load_victim, save_victim, train_victim
from ga2c.victim.oracle import seal

logger = logging.getLogger(__name__)


# =============================================================================
# Shared helpers
# =============================================================================


def _settings(args: argparse.Namespace) -> Settings:
    settings = get_settings(args.config_dir) if args.config_dir else get_settings()
    updates = {}
    if getattr(args, "data_dir", None) is not None:
        updates["data"] = settings.data.model_copy(update={"data_dir": args.data_dir})
    if getattr(args, "workers", None) is not None:
        updates["evaluation"] = settings.evaluation.model_copy(update={"workers": args.workers})
    if getattr(args, "no_progress", False):
        evaluation = updates.get("evaluation", settings.evaluation)
        updates["evaluation"] = evaluation.model_copy(update={"show_progress": False})
    return settings.model_copy(update=updates) if updates else settings


def _graph(args: argparse.Namespace, settings: Settings) -> Graph:
    return load_dataset(locate_dataset(args.dataset, settings.data.data_dir))


def _budget(args: argparse.Namespace, g: Graph) -> AttackBudget:
    return resolve_budgets(graph_statistics(g), args.beta_n, args.beta_e, args.beta_f)


def _victim(args: argparse.Namespace, g: Graph) -> VictimHandle:
    return load_victim(Path(args.victim), g)


def _policy(args: argparse.Namespace, g: Graph) -> PolicySet:
    if args.policy is None:
        raise ConfigurationError("--policy is required for this command")
    return load_policy(Path(args.policy), g.num_features, g.num_classes)


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _report_summary(report: AttackReport) -> dict:
    return {
        "method": report.method,
        "dataset": report.dataset,
        "seed": report.seed,
        "budget": report.budget.model_dump(),
        "num_targets": report.num_targets,
        "clean_accuracy": report.clean_accuracy,
        "attacked_accuracy": report.attacked_accuracy,
        "success_rate": report.success_rate,
    }


# =============================================================================
# Commands
# =============================================================================


def cmd_fetch_dataset(args: argparse.Namespace, settings: Settings) -> int:
    directory = fetch_dataset(args.name, settings.data, split_seed=args.seed)
    _emit({"dataset": args.name, "path": str(directory)})
    return EXIT_OK


def cmd_train_victim(args: argparse.Namespace, settings: Settings) -> int:
    g = _graph(args, settings)
    handle = train_victim(
        g, settings.victim, seed=args.seed, show_progress=settings.evaluation.show_progress
    )
    save_victim(handle, Path(args.out))
    _emit({"checkpoint": str(args.out), **handle.metadata})
    return EXIT_OK


def cmd_attack_train(args: argparse.Namespace, settings: Settings) -> int:
    g = _graph(args, settings)
    victim = _victim(args, g)
    budget = _budget(args, g)
    training = settings.training.model_copy(update={"seed": args.seed})
    if args.max_epochs is not None:
        training = training.model_copy(update={"max_epochs": args.max_epochs})
    policy = PolicySet(
        g.num_features,
        g.num_classes,
        settings.attacker,
        rng=derive_rng(args.seed, POLICY_INIT_STREAM),
    )
    result = train(
        policy,
        seal(victim),
        g,
        select_targets(g, args.train_targets, args.seed),
        training,
        budget,
        metrics_path=Path(args.metrics) if args.metrics else None,
        workers=settings.evaluation.workers,
        show_progress=settings.evaluation.show_progress,
    )
    save_policy(
        result.policy,
        Path(args.out),
        metadata={
            "dataset": g.name,
            "seed": args.seed,
            "best_epoch": result.best_epoch,
            "best_success_rate": result.best_success_rate,
            **budget.model_dump(),
        },
    )
    _emit(
        {
            "checkpoint": str(args.out),
            "best_epoch": result.best_epoch,
            "best_success_rate": result.best_success_rate,
            "epochs_run": result.epochs_run,
        }
    )
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace, settings: Settings) -> int:
    g = _graph(args, settings)
    victim = _victim(args, g)
    policy = _policy(args, g)
    report = evaluate_attack(
        policy,
        victim,
        g,
        select_targets(g, args.targets, args.seed),
        _budget(args, g),
        args.seed,
        workers=settings.evaluation.workers,
        show_progress=settings.evaluation.show_progress,
        trace_path=Path(args.trace) if args.trace else None,
    )
    if args.out:
        atomic_write_json(Path(args.out), report)
    _emit(_report_summary(report))
    return EXIT_OK


def cmd_baseline(args: argparse.Namespace, settings: Settings) -> int:
    g = _graph(args, settings)
    victim = _victim(args, g)
    policy = _policy(args, g) if args.policy else None
    report = baseline_random(
        victim,
        g,
        select_targets(g, args.targets, args.seed),
        _budget(args, g),
        args.variant,
        args.seed,
        policy=policy,
        workers=settings.evaluation.workers,
        show_progress=settings.evaluation.show_progress,
    )
    if args.out:
        atomic_write_json(Path(args.out), report)
    _emit(_report_summary(report))
    return EXIT_OK


def _multipliers(text: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as e:
        raise ConfigurationError(f"Invalid multiplier list {text!r}") from e
    if not values or any(v <= 0 for v in values):
        raise ConfigurationError(f"Multipliers must be positive numbers, got {text!r}")
    return values


def cmd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    g = _graph(args, settings)
    victim = _victim(args, g)
    policy = _policy(args, g)
    reports = budget_sweep(
        policy,
        victim,
        g,
        select_targets(g, args.targets, args.seed),
        args.axis,
        _multipliers(args.multipliers),
        args.seed,
        base=_budget(args, g),
        out_csv=Path(args.out),
        workers=settings.evaluation.workers,
        show_progress=settings.evaluation.show_progress,
    )
    _emit({"csv": str(args.out), "reports": [_report_summary(r) for r in reports]})
    return EXIT_OK


def cmd_dump_embeddings(args: argparse.Namespace, settings: Settings) -> int:
    g = _graph(args, settings)
    victim = _victim(args, g)
    policy = _policy(args, g)
    trajectory = case_study_dump(
        policy, victim, g, args.target, _budget(args, g), Path(args.out), seed=args.seed
    )
    _emit({"csv": str(args.out), "target": trajectory.target, "success": trajectory.success})
    return EXIT_OK


def cmd_run(args: argparse.Namespace, settings: Settings) -> int:
    config = load_experiment_config(Path(args.config))
    if args.out:
        config = config.model_copy(update={"out_dir": Path(args.out)})
    result = run_manifest(config, settings)
    summary = result.summary.to_dict(orient="records") if result.summary is not None else []
    _emit({"out_dir": str(result.out_dir), "summary": summary})
    return EXIT_OK


# =============================================================================
# Parser
# =============================================================================


def _add_common(p: argparse.ArgumentParser, dataset: bool = True) -> None:
    if dataset:
        p.add_argument("--dataset", required=True, help="Dataset name or path")
    p.add_argument("--data-dir", type=Path, default=None, help="Dataset directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None, help="Parallel episodes")
    p.add_argument("--no-progress", action="store_true", help="Disable progress bars")


def _add_budgets(p: argparse.ArgumentParser) -> None:
    p.add_argument("--beta-n", default="3", help="Injected nodes: <int>, avg or <float>x")
    p.add_argument("--beta-e", default="avg", help="Injected degree: <int>, avg or <float>x")
    p.add_argument("--beta-f", default="avg", help="Active features: <int>, avg or <float>x")


def _add_targets(p: argparse.ArgumentParser) -> None:
    p.add_argument("--targets", default="test", help="test, val, sample:<n> or file:<path>")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ga2c",
        description="Black-box node injection attack on GCNs trained with actor-critic",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config-dir", type=Path, default=None, help="Settings YAML directory")
    parser.add_argument("--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--log-format", default=None, choices=["json", "text"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch-dataset", help="Download a citation dataset")
    p.add_argument("--name", required=True, choices=DOWNLOADABLE_DATASETS)
    _add_common(p, dataset=False)
    p.set_defaults(func=cmd_fetch_dataset)

    p = sub.add_parser("train-victim", help="Train the GCN victim")
    _add_common(p)
    p.add_argument("--out", required=True, help="Victim checkpoint path")
    p.set_defaults(func=cmd_train_victim)

    p = sub.add_parser("attack-train", help="Train the attacker against a victim")
    _add_common(p)
    _add_budgets(p)
    p.add_argument("--victim", required=True, help="Victim checkpoint")
    p.add_argument("--out", required=True, help="Policy checkpoint path")
    p.add_argument("--metrics", default=None, help="JSON-lines metrics path")
    p.add_argument("--train-targets", default="val", help="Training target selector")
    p.add_argument("--max-epochs", type=int, default=None)
    p.set_defaults(func=cmd_attack_train)

    p = sub.add_parser("evaluate", help="Attack every target with a trained policy")
    _add_common(p)
    _add_budgets(p)
    _add_targets(p)
    p.add_argument("--victim", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--out", default=None, help="Report JSON path")
    p.add_argument("--trace", default=None, help="Episode trace JSON-lines path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline", help="Evaluate a random baseline")
    _add_common(p)
    _add_budgets(p)
    _add_targets(p)
    p.add_argument("--variant", required=True, choices=BASELINE_VARIANTS)
    p.add_argument("--victim", required=True)
    p.add_argument("--policy", default=None, help="Needed by the hybrid variants")
    p.add_argument("--out", default=None, help="Report JSON path")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("sweep", help="Evaluate over budget multipliers")
    _add_common(p)
    _add_budgets(p)
    _add_targets(p)
    p.add_argument("--victim", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--axis", required=True, choices=["beta_n", "beta_e", "beta_f"])
    p.add_argument("--multipliers", required=True, help="Comma separated, e.g. 0.5,1,1.5,2")
    p.add_argument("--out", required=True, help="Sweep CSV path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("dump-embeddings", help="Victim embeddings around one attacked target")
    _add_common(p)
    _add_budgets(p)
    p.add_argument("--victim", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--out", required=True, help="Embedding CSV path")
    p.set_defaults(func=cmd_dump_embeddings)

    p = sub.add_parser("run", help="Run an experiment config end to end")
    p.add_argument("--config", required=True, help="Experiment JSON or YAML")
    p.add_argument("--out", default=None, help="Override the output directory")
    p.add_argument("--no-progress", action="store_true")
    p.set_defaults(func=cmd_run)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run one command and return its exit code.

    0 on success, 2 on configuration errors, 3 on any other failure.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = _settings(args)
    except Exception as e:
        configure_logging()
        log_error(e)
        return exit_code_for(e)

    configure_logging(
        level=args.log_level or settings.logging.level,
        format=args.log_format or settings.logging.format,
    )
    func: Callable[[argparse.Namespace, Settings], int] = args.func
    with run_context():
        logger.info(
            f"ga2c {__version__}: {args.command}",
            extra={"stage": args.command, "seed": getattr(args, "seed", None)},
        )
        try:
            settings.validate_required()
            return func(args, settings)
        except Exception as e:
            log_error(e, stage=args.command)
            return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
