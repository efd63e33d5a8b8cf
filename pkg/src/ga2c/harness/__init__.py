"""Experiment harness: evaluation, baselines, sweeps, case studies and run manifests."""

from ga2c.harness.baselines import baseline_random
from ga2c.harness.case_study import case_study_dump
from ga2c.harness.evaluate import evaluate_attack
from ga2c.harness.experiment import (
    ExperimentConfig,
    load_experiment_config,
    parse_budget,
    resolve_budgets,
    select_targets,
)
from ga2c.harness.manifest import accuracy_table, run_manifest, summary_table
from ga2c.harness.sweep import budget_sweep

__all__ = [
    "ExperimentConfig",
    "accuracy_table",
    "baseline_random",
    "budget_sweep",
    "case_study_dump",
    "evaluate_attack",
    "load_experiment_config",
    "parse_budget",
    "resolve_budgets",
    "run_manifest",
    "select_targets",
    "summary_table",
]
