"""Discounted returns and the per-batch replay buffer."""

from collections.abc import Iterator, Sequence
from dataclasses import dataclass

from ga2c.attacker.episode import EdgeStep, EpisodeTrajectory, NodeStep
from ga2c.utils.errors import EmptyInputError


def compute_returns(rewards: Sequence[float], gamma: float) -> list[float]:
    """R_t = sum over j >= t of r_j * gamma^(j - t).

    Raises:
        EmptyInputError: If ``rewards`` is empty.
    """
    if len(rewards) == 0:
        raise EmptyInputError("cannot compute returns of an empty reward list")
    returns = [0.0] * len(rewards)
    running = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        running = float(rewards[t]) + gamma * running
        returns[t] = running
    return returns


@dataclass(frozen=True, eq=False)
class Transition:
    """One stored wiring action.

    Attributes:
        episode: Index of the episode in the buffer.
        step: The wiring step (state, chosen node, rollout log-probability).
        ret: Monte-Carlo return from this step to the episode end.
    """

    episode: int
    step: EdgeStep
    ret: float


@dataclass(frozen=True, eq=False)
class EpisodeRecord:
    """Per-episode metadata kept alongside the transitions."""

    target: int
    clean_label: int
    node_steps: tuple[NodeStep, ...]
    rewards: tuple[float, ...]
    success: bool


class ReplayBuffer:
    """On-policy memory of one training batch.

    Only wiring actions are stored, with their discounted returns. The
    node-generation steps of each episode are kept as metadata so their
    feature samples can be replayed with gradients.
    """

    def __init__(self, gamma: float):
        if not 0.0 < gamma <= 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {gamma}")
        self.gamma = gamma
        self.transitions: list[Transition] = []
        self.episodes: list[EpisodeRecord] = []

    def add_episode(self, trajectory: EpisodeTrajectory) -> None:
        """Store a finished episode.

        Episodes without a wiring step contribute their feature samples only.
        """
        index = len(self.episodes)
        edge_steps = trajectory.edge_steps
        rewards = tuple(s.reward for s in edge_steps)
        self.episodes.append(
            EpisodeRecord(
                target=trajectory.target,
                clean_label=trajectory.clean_label,
                node_steps=tuple(trajectory.node_steps),
                rewards=rewards,
                success=trajectory.success,
            )
        )
        if not edge_steps:
            return
        for step, ret in zip(edge_steps, compute_returns(rewards, self.gamma), strict=True):
            self.transitions.append(Transition(episode=index, step=step, ret=ret))

    def episode_transitions(self, index: int) -> list[Transition]:
        return [t for t in self.transitions if t.episode == index]

    def clear(self) -> None:
        self.transitions = []
        self.episodes = []

    def __iter__(self) -> Iterator[Transition]:
        return iter(self.transitions)

    def __len__(self) -> int:
        return len(self.transitions)
