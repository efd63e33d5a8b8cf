"""Tests for the node generator, edge sampler, value predictor and rewards."""

import numpy as np
import pytest

from ga2c.attacker import (
    EdgeChoice,
    PolicySet,
    edge_distribution,
    generate_node,
    load_policy,
    predict_value,
    reward_from_losses,
    sample_edge,
    save_policy,
    step_reward,
    value_from_probs,
)
from ga2c.attacker.edges import candidate_mask, edge_logits
from ga2c.attacker.generator import (
    feature_probabilities,
    round_half_up,
    top_indices,
    truncate_to_budget,
)
from ga2c.autodiff import Tensor
from ga2c.autodiff import functional as F
from ga2c.autodiff.gradcheck import check_gradients
from ga2c.config import AttackerConfig
from ga2c.graph.graph import AttackedGraph, Graph
from ga2c.utils.errors import ConfigurationError, ConstraintError, NoCandidateError
from ga2c.victim.oracle import seal
from tests.conftest import make_policy


def _injected(g: Graph, features) -> tuple[AttackedGraph, int]:
    return AttackedGraph.clean(g).inject(np.asarray(features, dtype=np.float64))


def _relaxed_row(policy: PolicySet, g: AttackedGraph, v: int, noise: np.ndarray) -> Tensor:
    """Relaxed sample for fixed Gumbel noise, as a tensor also under no_grad."""
    sample = generate_node(policy, g, v, beta_f=3, noise=noise)
    if sample.relaxed_tensor is None:
        return Tensor(sample.relaxed)
    return sample.relaxed_tensor


class TestFeatureHelpers:
    """Tests for rounding, ranking and the feature budget cut."""

    def test_round_half_up(self):
        """Test that exactly 1/2 rounds up."""
        np.testing.assert_array_equal(
            round_half_up(np.array([0.49, 0.5, 0.51, 0.0, 1.0])), [0, 1, 1, 0, 1]
        )

    def test_top_indices_breaks_ties_low(self):
        """Test that equal scores prefer the lower index."""
        np.testing.assert_array_equal(top_indices(np.array([0.3, 0.7, 0.7, 0.1]), 2), [1, 2])
        np.testing.assert_array_equal(top_indices(np.array([0.5, 0.5, 0.5]), 1), [0])

    def test_truncate_keeps_largest_relaxed(self):
        """Test that the cut keeps the active entries with the largest relaxed values."""
        hard = np.array([1.0, 1.0, 0.0, 1.0])
        relaxed = np.array([0.6, 0.9, 0.95, 0.7])
        np.testing.assert_array_equal(truncate_to_budget(hard, relaxed, 2), [0, 1, 0, 1])

    def test_truncate_within_budget_is_identity(self):
        """Test that rows already within budget pass unchanged."""
        hard = np.array([1.0, 0.0, 1.0])
        np.testing.assert_array_equal(truncate_to_budget(hard, np.zeros(3), 2), hard)


class TestGenerateNode:
    """Tests for the adversarial node generator."""

    def test_zero_alpha_gives_subgraph_mean(self, toy_graph):
        """Test that alpha_n = 0 makes p the mean of the neighbourhood features."""
        policy = make_policy(toy_graph, alpha_n=0.0)
        p = feature_probabilities(policy, AttackedGraph.clean(toy_graph), 0)
        np.testing.assert_allclose(p.data, [0.25, 0.5])

    def test_zero_weights_give_one_half(self, toy_graph):
        """Test that alpha_n = 1 with zero W_f gives p = 1/2 everywhere."""
        policy = make_policy(toy_graph, alpha_n=1.0)
        policy.w_feature.data[:] = 0.0
        p = feature_probabilities(policy, AttackedGraph.clean(toy_graph), 0)
        np.testing.assert_allclose(p.data, [0.5, 0.5])

    def test_probabilities_are_clamped(self, toy_graph):
        """Test that p stays inside [eps, 1 - eps]."""
        policy = make_policy(toy_graph, alpha_n=0.0, clamp_eps=1e-3)
        p = feature_probabilities(policy, AttackedGraph.clean(toy_graph), 7)
        # Subgraph of node 7 has feature 1 everywhere and feature 0 nowhere
        np.testing.assert_allclose(p.data, [1e-3, 1.0 - 1e-3])

    def test_zero_noise_rounds_to_zero(self, toy_graph):
        """Test that without noise sigmoid(log p) < 1/2 emits nothing."""
        policy = make_policy(toy_graph, alpha_n=0.0, clamp_eps=1e-6)
        clean = AttackedGraph.clean(toy_graph)
        sample = generate_node(policy, clean, 7, beta_f=2, noise=np.zeros(2))
        # p = (eps, 1 - eps): sigmoid(log p) = p / (1 + p) < 1/2
        np.testing.assert_allclose(sample.relaxed, sample.probs / (1.0 + sample.probs))
        np.testing.assert_array_equal(sample.hard, [0.0, 0.0])

    def test_noise_pushes_entries_on(self, toy_graph):
        """Test that a large positive draw switches an entry on."""
        policy = make_policy(toy_graph, alpha_n=0.0)
        sample = generate_node(
            policy, AttackedGraph.clean(toy_graph), 0, beta_f=2, noise=np.array([5.0, -5.0])
        )
        np.testing.assert_array_equal(sample.hard, [1.0, 0.0])
        np.testing.assert_array_equal(sample.noise, [5.0, -5.0])

    def test_budget_cut_prefers_larger_relaxed(self, toy_graph):
        """Test that sampled entries beyond beta_f are dropped by relaxed value."""
        policy = make_policy(toy_graph, alpha_n=0.0)
        sample = generate_node(
            policy, AttackedGraph.clean(toy_graph), 0, beta_f=1, noise=np.array([5.0, 5.0])
        )
        np.testing.assert_array_equal(sample.sampled, [1.0, 1.0])
        np.testing.assert_array_equal(sample.hard, [0.0, 1.0])

    def test_greedy_takes_top_probabilities(self, toy_graph):
        """Test that greedy mode emits the beta_f largest p."""
        policy = make_policy(toy_graph, alpha_n=0.0)
        sample = generate_node(policy, AttackedGraph.clean(toy_graph), 0, beta_f=1, mode="greedy")
        np.testing.assert_array_equal(sample.hard, [0.0, 1.0])
        np.testing.assert_array_equal(sample.noise, [0.0, 0.0])

    def test_topk_sampler_ignores_rng(self, random_graph):
        """Test that the topk sampler is deterministic and fills the budget."""
        policy = make_policy(random_graph, feature_sampler="topk")
        g = AttackedGraph.clean(random_graph)
        a = generate_node(policy, g, 0, beta_f=3, rng=np.random.default_rng(1))
        b = generate_node(policy, g, 0, beta_f=3, rng=np.random.default_rng(2))
        np.testing.assert_array_equal(a.hard, b.hard)
        assert a.hard.sum() == 3

    def test_explore_is_seeded(self, small_policy, random_graph):
        """Test that equal generators give equal samples."""
        g = AttackedGraph.clean(random_graph)
        a = generate_node(small_policy, g, 3, beta_f=3, rng=np.random.default_rng(9))
        b = generate_node(small_policy, g, 3, beta_f=3, rng=np.random.default_rng(9))
        np.testing.assert_array_equal(a.hard, b.hard)
        assert a.hard.sum() <= 3

    def test_explore_needs_randomness(self, small_policy, random_graph):
        """Test that explore mode without rng or noise is refused."""
        with pytest.raises(ValueError):
            generate_node(small_policy, AttackedGraph.clean(random_graph), 0, beta_f=2)

    def test_straight_through_reaches_generator(self, small_policy, random_graph):
        """Test that the emitted row carries gradients to W_f."""
        g = AttackedGraph.clean(random_graph)
        rng = np.random.default_rng(0)
        rows = [generate_node(small_policy, g, v, 3, rng=rng).straight_through() for v in range(5)]
        F.sum(F.concat(rows)).backward()
        assert small_policy.w_feature.grad is not None
        assert np.any(small_policy.w_feature.grad != 0.0)

    def test_probability_gradients(self, random_graph):
        """Test d p / d W_f against finite differences."""
        policy = make_policy(random_graph, clamp_eps=1e-9)
        g = AttackedGraph.clean(random_graph)
        weights = np.random.default_rng(0).standard_normal(random_graph.num_features)

        def fn():
            return F.sum(F.mul(feature_probabilities(policy, g, 4), weights))

        assert check_gradients(fn, [policy.w_feature])

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_relaxed_sample_gradients(self, random_graph, seed):
        """Test the gradient of a weighted relaxed row against finite differences."""
        policy = make_policy(random_graph, seed=seed, clamp_eps=1e-9)
        g = AttackedGraph.clean(random_graph)
        rng = np.random.default_rng(seed)
        noise = rng.gumbel(size=random_graph.num_features)
        weights = rng.standard_normal(random_graph.num_features)

        def fn():
            return F.sum(F.mul(_relaxed_row(policy, g, 2 + seed, noise), weights))

        assert check_gradients(fn, [policy.w_feature])


class TestEdgeDistribution:
    """Tests for the edge sampler distribution."""

    def test_masks_self_and_neighbours(self, toy_graph):
        """Test that the injected node and its neighbours get probability exactly 0."""
        policy = make_policy(toy_graph)
        g, a = _injected(toy_graph, [1, 0])
        g = g.wire(a, 4)
        dist = edge_distribution(policy, g, a, 0)
        assert dist.probs[a] == 0.0
        assert dist.probs[4] == 0.0
        assert dist.probs.sum() == pytest.approx(1.0)
        assert np.all(dist.probs[[0, 1, 2, 3, 5]] > 0.0)

    def test_masks_injected_nodes_without_degree_left(self, toy_graph):
        """Test that earlier injected nodes at the degree budget are excluded."""
        policy = make_policy(toy_graph)
        g, first = _injected(toy_graph, [1, 0])
        g = g.wire(first, 4)
        g, second = g.inject(np.array([0.0, 1.0]))
        assert edge_distribution(policy, g, second, 0).probs[first] > 0.0
        dist = edge_distribution(policy, g, second, 0, max_degree=1)
        assert dist.probs[first] == 0.0
        assert dist.probs.sum() == pytest.approx(1.0)

    def test_prior_ratio_with_zero_weights(self, toy_graph):
        """Test that with zero W_e a target neighbour is e times as likely."""
        policy = make_policy(toy_graph)
        policy.w_edge.data[:] = 0.0
        g, a = _injected(toy_graph, [0, 1])
        dist = edge_distribution(policy, g, a, 0)
        assert dist.probs[1] / dist.probs[2] == pytest.approx(np.e)
        assert dist.probs[1] == pytest.approx(np.e / (np.e + 9.0))

    def test_no_prior_is_uniform(self, toy_graph):
        """Test that without the prior zero weights give a uniform distribution."""
        policy = make_policy(toy_graph, edge_prior=False)
        policy.w_edge.data[:] = 0.0
        g, a = _injected(toy_graph, [0, 1])
        dist = edge_distribution(policy, g, a, 0)
        np.testing.assert_allclose(dist.probs[:10], np.full(10, 0.1))

    def test_matches_brute_force_softmax(self, small_policy, random_graph):
        """Test against an explicit softmax over the masked logits."""
        g, a = _injected(random_graph, np.eye(random_graph.num_features)[2])
        g = g.wire(a, 7)
        logits = edge_logits(small_policy, g, a, 7).data + candidate_mask(g, a)
        finite = np.isfinite(logits)
        expected = np.zeros_like(logits)
        expected[finite] = np.exp(logits[finite] - logits[finite].max())
        expected /= expected.sum()
        dist = edge_distribution(small_policy, g, a, 7)
        np.testing.assert_allclose(dist.probs, expected, atol=1e-12)
        assert dist.log_prob(3).item() == pytest.approx(np.log(expected[3]))

    def test_log_prob_gradients(self, small_policy, random_graph):
        """Test d log p / d W_e against finite differences."""
        g, a = _injected(random_graph, np.eye(random_graph.num_features)[0])

        def fn():
            return edge_distribution(small_policy, g, a, 5).log_prob(11)

        assert check_gradients(fn, [small_policy.w_edge])

    def test_clean_node_is_not_a_source(self, toy_graph):
        """Test that the sampler only wires injected nodes."""
        with pytest.raises(ConstraintError):
            edge_distribution(make_policy(toy_graph), AttackedGraph.clean(toy_graph), 0, 0)

    def test_exhausted_candidates(self):
        """Test that a node wired to everything has no distribution."""
        tiny = Graph.from_lists(2, [], [[0], [0]], 1, [0, 1], None, 2)
        g, a = _injected(tiny, [1])
        g = g.wire(a, 0).wire(a, 1)
        with pytest.raises(NoCandidateError):
            edge_distribution(make_policy(tiny), g, a, 0)


class TestSampleEdge:
    """Tests for drawing from the edge distribution."""

    def test_point_mass(self):
        """Test that a one-hot distribution always returns its node."""
        rng = np.random.default_rng(0)
        for _ in range(20):
            choice = sample_edge(np.array([0.0, 0.0, 1.0, 0.0]), rng)
            assert choice == EdgeChoice(node=2, logprob=0.0)

    def test_frequencies(self):
        """Test that empirical frequencies follow the distribution."""
        probs = np.array([0.2, 0.3, 0.5])
        rng = np.random.default_rng(1)
        draws = [sample_edge(probs, rng).node for _ in range(20000)]
        freq = np.bincount(draws, minlength=3) / len(draws)
        np.testing.assert_allclose(freq, probs, atol=0.02)

    def test_greedy_is_argmax(self):
        """Test that greedy sampling returns the most likely node."""
        choice = sample_edge(np.array([0.2, 0.5, 0.3]), greedy=True)
        assert choice.node == 1
        assert choice.logprob == pytest.approx(np.log(0.5))

    def test_empty_distribution(self):
        """Test that an all-zero distribution raises NoCandidateError."""
        with pytest.raises(NoCandidateError):
            sample_edge(np.zeros(4), np.random.default_rng(0))

    def test_needs_rng(self):
        """Test that stochastic sampling requires a generator."""
        with pytest.raises(ValueError):
            sample_edge(np.array([0.5, 0.5]))


class TestValuePredictor:
    """Tests for the value predictor."""

    def test_zero_weights_give_log_num_classes(self, random_victim, random_graph):
        """Test that zero W_v predicts ln C."""
        policy = make_policy(random_graph)
        policy.w_value.data[:] = 0.0
        g = AttackedGraph.clean(random_graph)
        value = value_from_probs(policy, 0, g, random_victim.clean_prediction(0), 1)
        assert value.item() == pytest.approx(np.log(random_graph.num_classes))

    def test_predict_value_queries_once(self, small_policy, random_victim, random_graph):
        """Test that predict_value asks the victim exactly once."""
        oracle = seal(random_victim)
        g = AttackedGraph.clean(random_graph)
        value = predict_value(small_policy, oracle, 2, g)
        assert oracle.query_count == 1
        expected = value_from_probs(
            small_policy, 2, g, random_victim.clean_prediction(2), random_victim.clean_label(2)
        )
        assert value.item() == pytest.approx(expected.item())

    def test_value_gradients(self, small_policy, random_victim, random_graph):
        """Test d V / d W_v against finite differences."""
        g = AttackedGraph.clean(random_graph)
        probs = random_victim.clean_prediction(6)

        def fn():
            return value_from_probs(small_policy, 6, g, probs, 0)

        assert check_gradients(fn, [small_policy.w_value])


class TestReward:
    """Tests for per-step rewards."""

    def test_loss_increase(self):
        """Test that a non-terminal step earns the loss increase."""
        reward, bonus = reward_from_losses(0.5, 1.3, terminal=False, flipped=False)
        assert reward == pytest.approx(0.8)
        assert bonus == 0.0

    def test_terminal_flip_bonus(self):
        """Test that a terminal flip adds the bonus."""
        reward, bonus = reward_from_losses(0.5, 1.3, terminal=True, flipped=True, bonus=2.0)
        assert reward == pytest.approx(2.8)
        assert bonus == 2.0

    def test_terminal_without_flip(self):
        """Test that the last step without a flip earns no bonus."""
        reward, bonus = reward_from_losses(1.0, 0.7, terminal=True, flipped=False)
        assert reward == pytest.approx(-0.3)
        assert bonus == 0.0

    def test_flip_reward(self):
        """Test the flip-indicator variant."""
        reward, _ = reward_from_losses(0.5, 0.6, terminal=False, flipped=True, kind="flip")
        assert reward == 1.0
        reward, _ = reward_from_losses(0.5, 0.6, terminal=False, flipped=False, kind="flip")
        assert reward == 0.0

    def test_step_reward_on_toy(self, toy_victim, toy_graph):
        """Test step_reward against two direct loss queries."""
        oracle = seal(toy_victim)
        before, a = _injected(toy_graph, [0, 1])
        after = before.wire(a, 0)
        expected = toy_victim.target_loss(0, after) - toy_victim.target_loss(0, before)
        reward = step_reward(oracle, 0, before, after, terminal=True, flipped=True)
        assert reward == pytest.approx(expected + 1.0)


class TestPolicyCheckpoint:
    """Tests for policy persistence."""

    def test_parameter_names(self, small_policy):
        """Test that every network contributes its weights."""
        names = list(small_policy.parameters())
        assert names == [
            "g_n.gcl0",
            "g_n.gcl1",
            "g_n.w_f",
            "g_e.gcl0",
            "g_e.gcl1",
            "g_e.w_e",
            "g_v.gcl0",
            "g_v.gcl1",
            "g_v.w_v",
        ]

    def test_save_then_load(self, small_policy, random_graph, tmp_path):
        """Test that a restored policy has identical weights and config."""
        save_policy(small_policy, tmp_path / "policy.json", metadata={"seed": 0})
        restored = load_policy(tmp_path / "policy.json", random_graph.num_features, 3)
        assert restored.config == small_policy.config
        for name, t in small_policy.parameters().items():
            np.testing.assert_array_equal(restored.parameters()[name].data, t.data)

    def test_dimension_mismatch(self, small_policy, tmp_path):
        """Test that a policy for other dimensions is refused."""
        save_policy(small_policy, tmp_path / "policy.json")
        with pytest.raises(ConfigurationError):
            load_policy(tmp_path / "policy.json", 5, 3)

    def test_snapshot_restore(self, random_graph):
        """Test that restore brings back snapshot values."""
        policy = PolicySet(random_graph.num_features, 3, AttackerConfig(hidden=4))
        snapshot = policy.snapshot()
        policy.w_edge.data += 1.0
        policy.restore(snapshot)
        np.testing.assert_array_equal(policy.w_edge.data, snapshot["g_e.w_e"])
