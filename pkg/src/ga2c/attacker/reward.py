"""Rewards for edge-wiring actions."""

from typing import TYPE_CHECKING, Literal

from ga2c.graph.graph import AttackedGraph

if TYPE_CHECKING:
    from ga2c.victim.oracle import BlackBoxOracle

RewardKind = Literal["loss", "flip"]


def reward_from_losses(
    loss_before: float,
    loss_after: float,
    terminal: bool,
    flipped: bool,
    bonus: float = 1.0,
    kind: RewardKind = "loss",
    flipped_before: bool = False,
) -> tuple[float, float]:
    """Reward of one wiring step from the target losses around it.

    ``kind="loss"`` rewards the loss increase; ``kind="flip"`` rewards the
    change of the flip indicator instead.

    Returns:
        (reward including the bonus, the bonus part alone).
    """
    if kind == "flip":
        base = float(flipped) - float(flipped_before)
    else:
        base = loss_after - loss_before
    extra = bonus if terminal and flipped else 0.0
    return base + extra, extra


def step_reward(
    victim: "BlackBoxOracle",
    v: int,
    before: AttackedGraph,
    after: AttackedGraph,
    terminal: bool,
    flipped: bool,
    bonus: float = 1.0,
) -> float:
    """target_loss(v, after) - target_loss(v, before), plus ``bonus`` on a terminal flip."""
    reward, _ = reward_from_losses(
        victim.target_loss(v, before),
        victim.target_loss(v, after),
        terminal,
        flipped,
        bonus,
    )
    return reward
