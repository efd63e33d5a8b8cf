"""Experiment configuration: budgets, target selection and run manifests."""

import json
import re
from pathlib import Path
from typing import Literal

import numpy as np
import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator

from ga2c.graph.budget import AttackBudget, GraphStatistics, round_budget
from ga2c.graph.graph import Graph
from ga2c.models.report import AttackMethod
from ga2c.utils.errors import ConfigurationError
from ga2c.utils.seeding import derive_rng

# "3", "avg", "1.5x"
BudgetValue = int | str
BudgetAxis = Literal["beta_n", "beta_e", "beta_f"]

_MULTIPLIER = re.compile(r"^(\d+(\.\d*)?|\.\d+)x$")

# Sub-stream key for target sampling
_TARGET_STREAM = 7


def parse_budget(value: BudgetValue) -> int | float | Literal["avg"]:
    """Parse a budget flag: an absolute count, ``avg`` or a multiplier ``<float>x``.

    Returns:
        The count (int), ``"avg"``, or the multiplier (float).

    Raises:
        ConfigurationError: For anything else, or a non-positive value.
    """
    if isinstance(value, bool):
        raise ConfigurationError(f"Invalid budget {value!r}")
    if isinstance(value, int):
        if value < 1:
            raise ConfigurationError(f"Budget must be at least 1, got {value}")
        return value
    text = str(value).strip().lower()
    if text == "avg":
        return "avg"
    if text.isdigit():
        return parse_budget(int(text))
    if _MULTIPLIER.match(text):
        multiplier = float(text[:-1])
        if multiplier <= 0.0:
            raise ConfigurationError(f"Budget multiplier must be positive, got {value!r}")
        return multiplier
    raise ConfigurationError(f"Invalid budget {value!r}; expected an integer, 'avg' or '<float>x'")


def resolve_budget(value: BudgetValue, base: float) -> int:
    """Resolve a budget flag against ``base`` (a dataset average, or 1 for node counts)."""
    parsed = parse_budget(value)
    if parsed == "avg":
        return round_budget(base)
    if isinstance(parsed, float):
        return round_budget(parsed * base)
    return parsed


def resolve_budgets(
    stats: GraphStatistics,
    beta_n: BudgetValue = 3,
    beta_e: BudgetValue = "avg",
    beta_f: BudgetValue = "avg",
) -> AttackBudget:
    """Concrete budgets for a dataset. β_n multiplies 1; β_e and β_f multiply the averages."""
    return AttackBudget(
        beta_n=resolve_budget(beta_n, 1.0),
        beta_e=resolve_budget(beta_e, stats.avg_degree),
        beta_f=resolve_budget(beta_f, stats.avg_feature_sum),
    )


def select_targets(g: Graph, selector: str, seed: int = 0) -> np.ndarray:
    """Target node ids from a selector.

    ``test`` (the test split), ``val`` (the validation split),
    ``sample:<n>`` (a seeded sample of n test nodes) or ``file:<path>``
    (a JSON list, or whitespace separated ids).

    Raises:
        ConfigurationError: On an unknown selector, a missing split or file,
            or ids outside the graph.
    """
    selector = selector.strip()
    if selector in ("test", "val", "train"):
        nodes = _split(g, selector)
    elif selector.startswith("sample:"):
        try:
            n = int(selector.split(":", 1)[1])
        except ValueError as e:
            raise ConfigurationError(f"Invalid target sample size in {selector!r}") from e
        if n < 1:
            raise ConfigurationError(f"Target sample size must be positive, got {n}")
        test = _split(g, "test")
        if n >= test.size:
            nodes = test
        else:
            nodes = np.sort(derive_rng(seed, _TARGET_STREAM).choice(test, size=n, replace=False))
    elif selector.startswith("file:"):
        nodes = _read_target_file(Path(selector.split(":", 1)[1]))
    else:
        raise ConfigurationError(
            f"Unknown target selector {selector!r}; use test, val, sample:<n> or file:<path>"
        )
    nodes = np.asarray(nodes, dtype=np.int64)
    if nodes.size and (nodes.min() < 0 or nodes.max() >= g.num_nodes):
        raise ConfigurationError(f"Target ids out of range for a graph of {g.num_nodes} nodes")
    return nodes


def _split(g: Graph, name: str) -> np.ndarray:
    if name not in g.splits or len(g.splits[name]) == 0:
        raise ConfigurationError(f"Dataset {g.name!r} has no {name} split")
    return np.sort(np.asarray(g.splits[name], dtype=np.int64))


def _read_target_file(path: Path) -> np.ndarray:
    if not path.is_file():
        raise ConfigurationError(f"Target file not found: {path}")
    text = path.read_text(encoding="utf-8").strip()
    try:
        if text.startswith("["):
            ids = json.loads(text)
        else:
            ids = [int(tok) for tok in text.split()]
    except ValueError as e:
        raise ConfigurationError(f"Target file {path} is not a list of node ids: {e}") from e
    return np.asarray(ids, dtype=np.int64)


class SweepConfig(BaseModel):
    """One budget sweep of a manifest run."""

    axis: BudgetAxis
    multipliers: list[float] = Field(min_length=1)

    @field_validator("multipliers")
    @classmethod
    def _positive(cls, values: list[float]) -> list[float]:
        if any(m <= 0 for m in values):
            raise ValueError("sweep multipliers must be positive")
        return values


class ExperimentConfig(BaseModel):
    """One reproducible experiment: dataset, checkpoints, budgets, targets, seeds.

    Checkpoint paths that are unset are produced by the run; set ones must
    exist before any stage begins.
    """

    dataset: str
    data_dir: Path = Path("data")
    victim_checkpoint: Path | None = None
    policy_checkpoint: Path | None = None
    beta_n: BudgetValue = 3
    beta_e: BudgetValue = "avg"
    beta_f: BudgetValue = "avg"
    targets: str = "test"
    train_targets: str = "val"
    seeds: list[int] = Field(default_factory=lambda: [0], min_length=1)
    methods: list[AttackMethod] = Field(default_factory=lambda: ["ga2c", "random"])
    sweeps: list[SweepConfig] = Field(default_factory=list)
    out_dir: Path = Path("runs")

    @field_validator("beta_n", "beta_e", "beta_f")
    @classmethod
    def _budget(cls, value: BudgetValue) -> BudgetValue:
        try:
            parse_budget(value)
        except ConfigurationError as e:
            raise ValueError(e.detail) from e
        return value

    def validate_paths(self) -> None:
        """Check every input path before long-running work starts.

        Raises:
            ConfigurationError: If the dataset or a configured checkpoint is missing.
        """
        from ga2c.graph.datasets import locate_dataset

        locate_dataset(self.dataset, self.data_dir)
        for label, path in (
            ("victim checkpoint", self.victim_checkpoint),
            ("policy checkpoint", self.policy_checkpoint),
        ):
            if path is not None and not Path(path).is_file():
                raise ConfigurationError(f"{label} not found: {path}")
        if self.targets.startswith("file:") and not Path(self.targets[5:]).is_file():
            raise ConfigurationError(f"Target file not found: {self.targets[5:]}")


def load_experiment_config(path: Path) -> ExperimentConfig:
    """Read an experiment config from JSON or YAML.

    Relative paths inside the file are resolved against the file's directory.

    Raises:
        ConfigurationError: If the file is missing or invalid.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Experiment config not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix in (".yaml", ".yml"):
            raw = yaml.safe_load(text) or {}
        else:
            raw = json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigurationError(f"Cannot parse {path}: {e}") from e
    try:
        config = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid experiment config {path}: {e}") from e

    base = path.parent
    updates = {}
    for key in ("data_dir", "out_dir", "victim_checkpoint", "policy_checkpoint"):
        value = getattr(config, key)
        if value is not None and not Path(value).is_absolute():
            updates[key] = base / value
    return config.model_copy(update=updates)
