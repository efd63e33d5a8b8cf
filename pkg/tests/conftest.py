"""Shared fixtures: toy graphs, random graphs and hand-weighted victims."""

import numpy as np
import pytest

from ga2c.attacker.policy import PolicySet
from ga2c.autodiff import Tensor
from ga2c.config import AttackerConfig
from ga2c.graph.budget import AttackBudget
from ga2c.graph.graph import Graph
from ga2c.victim.gcn import GCNModel
from ga2c.victim.handle import VictimHandle


def make_toy_graph() -> Graph:
    """Ten nodes, two features, two classes.

    Target 0 (no active feature) hangs off node 1 (feature 0), whose other
    neighbours 2 and 3 carry feature 1. Nodes 4-6 and 7-9 are separate
    paths of class 0 and class 1. Under the hand-weighted victim, one
    injected node with one edge flips node 0 exactly when it is wired to 0
    with features 00, 01 or 11, or to 1 with features 01.
    """
    edges = [(0, 1), (1, 2), (1, 3), (4, 5), (5, 6), (7, 8), (8, 9)]
    features = [[], [0], [1], [1], [0], [0], [0], [1], [1], [1]]
    labels = [0, 0, 1, 1, 0, 0, 0, 1, 1, 1]
    splits = {"train": [1, 2, 4, 7], "val": [5, 8], "test": [0, 3, 6, 9]}
    return Graph.from_lists(10, edges, features, 2, labels, splits, 2, name="toy")


def make_toy_victim(g: Graph) -> VictimHandle:
    """W0 = I, W1 = 10 I, no feature normalisation, no dropout."""
    model = GCNModel(2, 2, hidden=2, dropout=0.0, normalize_features=False)
    model.w0 = Tensor(np.eye(2), requires_grad=True, name="w0")
    model.w1 = Tensor(10.0 * np.eye(2), requires_grad=True, name="w1")
    return VictimHandle(model, g, metadata={"dataset": g.name})


def make_random_graph(
    seed: int,
    num_nodes: int = 30,
    num_features: int = 12,
    num_classes: int = 3,
    edge_prob: float = 0.12,
    feature_prob: float = 0.25,
) -> Graph:
    """Erdos-Renyi graph with random binary features and labels, and 10/10/rest splits."""
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((num_nodes, num_nodes)) < edge_prob, k=1)
    edges = list(zip(*np.nonzero(upper), strict=True))
    features = [np.flatnonzero(rng.random(num_features) < feature_prob) for _ in range(num_nodes)]
    labels = rng.integers(0, num_classes, size=num_nodes)
    order = rng.permutation(num_nodes)
    splits = {"train": order[:10], "val": order[10:20], "test": order[20:]}
    return Graph.from_lists(
        num_nodes, edges, features, num_features, labels, splits, num_classes, name=f"random{seed}"
    )


def make_random_victim(g: Graph, seed: int = 0, hidden: int = 8) -> VictimHandle:
    """Untrained GCN with Glorot weights, used wherever only the query path matters."""
    model = GCNModel(
        g.num_features,
        g.num_classes,
        hidden=hidden,
        dropout=0.0,
        normalize_features=True,
        rng=np.random.default_rng(seed),
    )
    return VictimHandle(model, g, metadata={"dataset": g.name})


def make_policy(g: Graph, seed: int = 0, **overrides) -> PolicySet:
    config = AttackerConfig(hidden=8, **overrides)
    return PolicySet(g.num_features, g.num_classes, config, rng=np.random.default_rng(seed))


@pytest.fixture
def toy_graph() -> Graph:
    return make_toy_graph()


@pytest.fixture
def toy_victim(toy_graph) -> VictimHandle:
    return make_toy_victim(toy_graph)


@pytest.fixture
def toy_budget() -> AttackBudget:
    return AttackBudget(beta_n=1, beta_e=1, beta_f=2)


@pytest.fixture
def random_graph() -> Graph:
    return make_random_graph(0)


@pytest.fixture
def random_victim(random_graph) -> VictimHandle:
    return make_random_victim(random_graph)


@pytest.fixture
def small_policy(random_graph) -> PolicySet:
    return make_policy(random_graph)


@pytest.fixture
def small_budget() -> AttackBudget:
    return AttackBudget(beta_n=2, beta_e=2, beta_f=3)
