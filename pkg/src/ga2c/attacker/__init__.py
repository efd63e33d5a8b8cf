"""Node generator, edge sampler, value predictor and the attack episode runner."""

from ga2c.attacker.edges import EdgeChoice, EdgeDistribution, edge_distribution, sample_edge
from ga2c.attacker.episode import (
    EdgeStep,
    EpisodeTrajectory,
    NodeStep,
    policy_edges,
    policy_features,
    run_episode,
)
from ga2c.attacker.generator import FeatureSample, generate_node
from ga2c.attacker.policy import PolicySet, load_policy, save_policy
from ga2c.attacker.reward import reward_from_losses, step_reward
from ga2c.attacker.value import predict_value, value_from_probs

__all__ = [
    "EdgeChoice",
    "EdgeDistribution",
    "EdgeStep",
    "EpisodeTrajectory",
    "FeatureSample",
    "NodeStep",
    "PolicySet",
    "edge_distribution",
    "generate_node",
    "load_policy",
    "policy_edges",
    "policy_features",
    "predict_value",
    "reward_from_losses",
    "run_episode",
    "sample_edge",
    "save_policy",
    "step_reward",
    "value_from_probs",
]
