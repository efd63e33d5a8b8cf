"""Batched actor-critic updates and the early-stopped training loop."""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from tqdm import tqdm

from ga2c.attacker.edges import edge_distribution
from ga2c.attacker.episode import EpisodeTrajectory, run_episode
from ga2c.attacker.generator import generate_node
from ga2c.attacker.policy import PolicySet
from ga2c.attacker.value import value_from_probs
from ga2c.autodiff import Tensor
from ga2c.autodiff import functional as F
from ga2c.autodiff.optim import Adam
from ga2c.config import TrainConfig
from ga2c.graph.budget import AttackBudget
from ga2c.graph.graph import Graph
from ga2c.models.events import EpochMetrics
from ga2c.training.buffer import ReplayBuffer
from ga2c.training.losses import feature_loss, policy_loss, value_loss
from ga2c.utils.errors import EmptyInputError, NumericalError
from ga2c.utils.io import JsonLinesWriter
from ga2c.utils.seeding import derive_rng

if TYPE_CHECKING:
    from ga2c.victim.oracle import BlackBoxOracle

logger = logging.getLogger(__name__)

# Sub-stream keys under the training seed
_BATCH_STREAM = 1
_PROBE_STREAM = 2
_EPISODE_STREAM = 3


@dataclass(frozen=True)
class StepReport:
    """Loss components of one update (means over their terms)."""

    mean_Lp: float
    mean_Lv: float
    mean_Lf: float
    total: float
    num_transitions: int
    num_samples: int


@dataclass
class TrainResult:
    """Outcome of :func:`train`.

    ``policy`` holds the best probe-scoring parameters.
    """

    policy: PolicySet
    best_success_rate: float
    best_epoch: int
    epochs_run: int
    history: list[EpochMetrics] = field(default_factory=list)


def _mean(values: list[float]) -> float:
    return float(np.mean(values)) if values else 0.0


def train_step(
    policy: PolicySet,
    buffer: ReplayBuffer,
    config: TrainConfig,
    budget: AttackBudget,
    optimizer: Adam | None = None,
) -> tuple[PolicySet, StepReport]:
    """One Adam step on the summed L_p + L_v + L_f of a filled buffer.

    Each episode's feature samples are regenerated from their stored Gumbel
    noise so their straight-through rows are on the tape; every stored
    wiring is then re-scored on its state with those rows in place of the
    injected features. The buffer is cleared afterwards.

    Raises:
        EmptyInputError: If the buffer holds no episode.
        NumericalError: If the total loss or a gradient is not finite. The
            parameters are left untouched.
    """
    if not buffer.episodes:
        raise EmptyInputError("train_step needs at least one episode in the buffer")
    if optimizer is None:
        optimizer = Adam(list(policy.parameters().values()), lr=config.lr)

    lp_terms: list[Tensor] = []
    lv_terms: list[Tensor] = []
    lf_terms: list[Tensor] = []

    for index, record in enumerate(buffer.episodes):
        rows: list[Tensor] = []
        for node_step in record.node_steps:
            replayed = generate_node(
                policy,
                node_step.state,
                record.target,
                budget.beta_f,
                mode="explore",
                noise=node_step.sample.noise,
            )
            soft = replayed.relaxed_tensor
            if soft is None:
                soft = Tensor(replayed.relaxed)
            rows.append(F.straight_through(node_step.sample.hard, soft))
            lf_terms.append(feature_loss(replayed, budget.beta_f))

        for transition in buffer.episode_transitions(index):
            step = transition.step
            m = step.state.num_injected
            injected_rows = F.reshape(F.concat(rows[:m]), (m, policy.num_features))
            dist = edge_distribution(
                policy,
                step.state,
                step.injected,
                record.target,
                injected_rows=injected_rows,
                max_degree=budget.beta_e,
            )
            value = value_from_probs(
                policy, record.target, step.state, step.probs_before, record.clean_label
            )
            lp_terms.append(policy_loss(dist.log_prob(step.chosen), transition.ret, value))
            lv_terms.append(value_loss(value, transition.ret))

    terms = lp_terms + lv_terms + lf_terms
    total = terms[0]
    for term in terms[1:]:
        total = F.add(total, term)

    report = StepReport(
        mean_Lp=_mean([t.item() for t in lp_terms]),
        mean_Lv=_mean([t.item() for t in lv_terms]),
        mean_Lf=_mean([t.item() for t in lf_terms]),
        total=total.item(),
        num_transitions=len(lp_terms),
        num_samples=len(lf_terms),
    )
    if not math.isfinite(report.total):
        raise NumericalError(
            f"non-finite loss (Lp={report.mean_Lp}, Lv={report.mean_Lv}, Lf={report.mean_Lf})"
        )

    optimizer.zero_grad()
    if total.requires_grad:
        total.backward()
    optimizer.step()
    buffer.clear()
    return policy, report


def probe_success_rate(
    policy: PolicySet,
    victim: "BlackBoxOracle",
    g: Graph,
    targets: np.ndarray,
    budget: AttackBudget,
    seed: int,
) -> float:
    """Fraction of ``targets`` a greedy episode flips."""
    if len(targets) == 0:
        return 0.0
    successes = 0
    for v in targets:
        trajectory = run_episode(
            policy, victim, g, int(v), budget, "greedy", derive_rng(seed, _PROBE_STREAM, int(v))
        )
        successes += int(trajectory.success)
    return successes / len(targets)


def select_probe_targets(targets: np.ndarray, size: int, seed: int) -> np.ndarray:
    """Fixed, seeded subset of the training targets used for early stopping."""
    targets = np.asarray(targets, dtype=np.int64)
    if size >= targets.size:
        return np.sort(targets)
    rng = derive_rng(seed, _PROBE_STREAM)
    return np.sort(rng.choice(targets, size=size, replace=False))


def rollout_batch(
    policy: PolicySet,
    victim: "BlackBoxOracle",
    g: Graph,
    batch: np.ndarray,
    budget: AttackBudget,
    seed: int,
    epoch: int,
    workers: int = 1,
) -> list[EpisodeTrajectory]:
    """Explore-mode episodes for one batch, in target order.

    Every episode draws from its own (seed, epoch, target) stream, so the
    result does not depend on ``workers``.
    """

    def one(v: int) -> EpisodeTrajectory:
        rng = derive_rng(seed, _EPISODE_STREAM, epoch, v)
        return run_episode(policy, victim, g, v, budget, "explore", rng)

    targets = [int(v) for v in batch]
    if workers <= 1:
        return [one(v) for v in targets]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, targets))


def train(
    policy: PolicySet,
    victim: "BlackBoxOracle",
    g: Graph,
    targets: np.ndarray,
    config: TrainConfig,
    budget: AttackBudget,
    probe_targets: np.ndarray | None = None,
    metrics_path: Path | None = None,
    workers: int = 1,
    show_progress: bool = False,
) -> TrainResult:
    """Train ``policy`` against ``victim`` on ``targets`` (validation nodes).

    Each epoch rolls ``batch_size`` explore episodes on targets drawn
    without replacement, applies one :func:`train_step`, then scores greedy
    episodes on the probe set. Training stops after ``patience`` epochs
    without a probe improvement (at least one) or at ``max_epochs``; the
    best-scoring parameters are restored into ``policy``.
    """
    targets = np.asarray(targets, dtype=np.int64)
    if targets.size == 0:
        raise EmptyInputError("no training targets")
    if probe_targets is None:
        probe_targets = select_probe_targets(targets, config.probe_size, config.seed)
    probe_targets = np.asarray(probe_targets, dtype=np.int64)

    optimizer = Adam(list(policy.parameters().values()), lr=config.lr)
    buffer = ReplayBuffer(config.gamma)
    batch_rng = derive_rng(config.seed, _BATCH_STREAM)
    writer = JsonLinesWriter(metrics_path) if metrics_path is not None else None

    best_rate = -1.0
    best_epoch = -1
    best_snapshot = policy.snapshot()
    since_improvement = 0
    history: list[EpochMetrics] = []
    epochs_run = 0
    start = time.perf_counter()

    for epoch in tqdm(range(config.max_epochs), desc="attack-train", disable=not show_progress):
        batch = batch_rng.choice(targets, size=min(config.batch_size, targets.size), replace=False)
        for trajectory in rollout_batch(
            policy, victim, g, batch, budget, config.seed, epoch, workers=workers
        ):
            buffer.add_episode(trajectory)
        _, report = train_step(policy, buffer, config, budget, optimizer)

        rate = probe_success_rate(policy, victim, g, probe_targets, budget, config.seed)
        epochs_run = epoch + 1
        if rate > best_rate:
            best_rate, best_epoch = rate, epoch
            best_snapshot = policy.snapshot()
            since_improvement = 0
        else:
            since_improvement += 1

        metrics = EpochMetrics(
            epoch=epoch,
            mean_Lp=report.mean_Lp,
            mean_Lv=report.mean_Lv,
            mean_Lf=report.mean_Lf,
            probe_success_rate=rate,
            victim_query_count=victim.query_count,
            best_success_rate=best_rate,
        )
        history.append(metrics)
        if writer is not None:
            writer.write(metrics)
        logger.debug(
            f"Epoch {epoch}: probe success {rate:.3f} (best {best_rate:.3f})",
            extra={"epoch": epoch},
        )

        if since_improvement >= max(config.patience, 1):
            logger.info(
                f"Early stopping after {since_improvement} epochs without improvement",
                extra={"epoch": epoch},
            )
            break

    policy.restore(best_snapshot)
    logger.info(
        f"Attacker training finished: best probe success {best_rate:.3f} at epoch {best_epoch}",
        extra={
            "epoch": best_epoch,
            "duration_ms": round((time.perf_counter() - start) * 1000, 2),
        },
    )
    return TrainResult(
        policy=policy,
        best_success_rate=best_rate,
        best_epoch=best_epoch,
        epochs_run=epochs_run,
        history=history,
    )
