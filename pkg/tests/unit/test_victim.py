"""Tests for the GCN victim, its query handle and the black-box oracle."""

import threading

import numpy as np
import pytest
import scipy.sparse as sp

from ga2c.autodiff import no_grad
from ga2c.autodiff.functional import loss_from_probs
from ga2c.config import VictimConfig
from ga2c.graph.graph import AttackedGraph, Graph
from ga2c.utils.errors import (
    BlackBoxViolationError,
    ConfigurationError,
    GraphIndexError,
    GraphMismatchError,
    ShapeError,
)
from ga2c.victim import (
    BlackBoxOracle,
    GCNModel,
    gcn_forward,
    load_victim,
    save_victim,
    seal,
    train_victim,
)
from ga2c.victim.gcn import accuracy, fit_gcn
from ga2c.victim.inspection import dump_embeddings
from tests.conftest import make_random_graph, make_toy_graph


class TestGCNForward:
    """Tests for the two-layer GCN forward pass."""

    def test_rows_are_distributions(self, random_graph):
        """Test that every row of the output sums to 1."""
        model = GCNModel(random_graph.num_features, random_graph.num_classes, hidden=8)
        with no_grad():
            probs = gcn_forward(model, random_graph).data
        assert probs.shape == (random_graph.num_nodes, random_graph.num_classes)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0)
        assert np.all(probs >= 0)

    def test_hand_weighted_toy_prediction(self, toy_victim):
        """Test the clean prediction of node 0 against the closed form."""
        margin = 10.0 * (0.75 * np.sqrt(0.125) - 0.25)
        probs = toy_victim.clean_prediction(0)
        assert probs[0] == pytest.approx(1.0 / (1.0 + np.exp(-margin)))
        assert toy_victim.clean_label(0) == 0

    def test_feature_width_mismatch(self, toy_graph):
        """Test that a model of another width rejects the graph."""
        model = GCNModel(3, 2, hidden=2)
        with pytest.raises(ShapeError):
            gcn_forward(model, toy_graph)

    def test_accuracy(self):
        """Test accuracy on a node subset and on no nodes."""
        probs = np.array([[0.9, 0.1], [0.2, 0.8], [0.6, 0.4]])
        labels = np.array([0, 0, 0])
        assert accuracy(probs, labels, np.array([0, 1])) == pytest.approx(0.5)
        assert accuracy(probs, labels, np.array([], dtype=np.int64)) == 0.0

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_node_relabelling_permutes_rows(self, seed):
        """Test that renumbering the nodes renumbers the output rows and nothing else."""
        g = make_random_graph(seed)
        model = GCNModel(g.num_features, g.num_classes, hidden=8, rng=np.random.default_rng(seed))
        perm = np.random.default_rng(100 + seed).permutation(g.num_nodes)
        relabelled = Graph(
            adjacency=sp.csr_matrix(g.adjacency[perm][:, perm]),
            features=sp.csr_matrix(g.features[perm]),
            labels=g.labels[perm].copy(),
            splits={},
            num_classes=g.num_classes,
            name=f"{g.name}-relabelled",
        )
        with no_grad():
            probs = gcn_forward(model, g).data
            permuted = gcn_forward(model, relabelled).data
        np.testing.assert_allclose(permuted, probs[perm], atol=1e-12)


class TestFitGCN:
    """Tests for victim training."""

    def test_training_is_seeded(self):
        """Test that the same seed gives the same weights and a valid summary."""
        g = make_random_graph(1, num_nodes=40)
        config = VictimConfig(hidden=8, epochs=40, dropout=0.0, lr=0.05)
        model_a, summary = fit_gcn(g, config, seed=3)
        model_b, _ = fit_gcn(g, config, seed=3)
        np.testing.assert_array_equal(model_a.w0.data, model_b.w0.data)
        assert 0.0 <= summary["val_accuracy"] <= 1.0
        assert 0 <= summary["best_epoch"] < 40

    def test_requires_splits(self):
        """Test that graphs without splits cannot train a victim."""
        g = Graph.from_lists(3, [(0, 1)], [[0], [], [0]], 1, [0, 1, 0], None, 2)
        with pytest.raises(ConfigurationError):
            fit_gcn(g, VictimConfig(epochs=1))

    def test_train_victim_metadata(self, random_graph):
        """Test that the handle records dataset, seed and accuracies."""
        handle = train_victim(random_graph, VictimConfig(hidden=4, epochs=5), seed=2)
        meta = handle.metadata
        assert meta["dataset"] == random_graph.name
        assert meta["seed"] == 2
        assert 0.0 <= meta["clean_accuracy"] <= 1.0


class TestVictimHandle:
    """Tests for the query interface."""

    def test_clean_query_matches_cached_prediction(self, random_victim, random_graph):
        """Test that querying the clean overlay reproduces the cached probabilities."""
        clean = AttackedGraph.clean(random_graph)
        for v in range(random_graph.num_nodes):
            np.testing.assert_allclose(
                random_victim.query(v, clean), random_victim.clean_prediction(v), atol=1e-12
            )

    def test_isolated_injection_changes_nothing(self, random_victim, random_graph):
        """Test that an unwired injected node leaves every clean node's output alone."""
        g, _ = AttackedGraph.clean(random_graph).inject(np.ones(random_graph.num_features))
        for v in range(random_graph.num_nodes):
            np.testing.assert_allclose(
                random_victim.query(v, g), random_victim.clean_prediction(v), atol=1e-12
            )

    def test_query_matches_full_forward(self, random_victim, random_graph):
        """Test the cached-projection path against a full forward pass."""
        g, a = AttackedGraph.clean(random_graph).inject(np.eye(random_graph.num_features)[0])
        g = g.wire(a, 0).wire(a, 5)
        with no_grad():
            full = gcn_forward(random_victim._model, g).data
        for v in (0, 5, a):
            np.testing.assert_allclose(random_victim.query(v, g), full[v], atol=1e-12)

    def test_queries_are_counted(self, toy_victim, toy_graph):
        """Test that query and target_loss each count once; clean lookups do not."""
        clean = AttackedGraph.clean(toy_graph)
        assert toy_victim.query_count == 0
        toy_victim.clean_prediction(0)
        toy_victim.query(0, clean)
        toy_victim.target_loss(0, clean)
        assert toy_victim.query_count == 2

    def test_concurrent_queries_are_counted(self, toy_victim, toy_graph):
        """Test that the counter is exact under concurrent queries."""
        clean = AttackedGraph.clean(toy_graph)

        def worker():
            for _ in range(25):
                toy_victim.query(0, clean)

        threads = [threading.Thread(target=worker) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert toy_victim.query_count == 100

    def test_target_loss(self, toy_victim, toy_graph):
        """Test that target_loss is -log of the clean-label probability."""
        clean = AttackedGraph.clean(toy_graph)
        probs = toy_victim.clean_prediction(0)
        assert toy_victim.target_loss(0, clean) == pytest.approx(-np.log(probs[0]))

    def test_query_unknown_node(self, toy_victim, toy_graph):
        """Test that a node outside the overlay is rejected."""
        with pytest.raises(GraphIndexError):
            toy_victim.query(10, AttackedGraph.clean(toy_graph))

    def test_foreign_graph(self, toy_victim, random_graph):
        """Test that overlays of another graph are refused."""
        with pytest.raises(ConfigurationError):
            toy_victim.query(0, AttackedGraph.clean(random_graph))

    def test_same_size_foreign_graph(self, toy_victim):
        """Test that an equal-sized copy of the clean graph is not accepted as its base."""
        copy = make_toy_graph()
        assert copy.num_nodes == toy_victim.graph.num_nodes
        with pytest.raises(GraphMismatchError):
            toy_victim.query(0, AttackedGraph.clean(copy))
        assert toy_victim.query_count == 0

    def test_loss_from_underflowed_probability(self):
        """Test that a zero probability yields a finite loss."""
        assert loss_from_probs(np.array([0.25, 0.75]), 0) == pytest.approx(np.log(4.0))
        assert np.isfinite(loss_from_probs(np.array([0.0, 1.0]), 0))

    def test_dump_embeddings(self, toy_victim, toy_graph):
        """Test that hidden embeddings follow the requested node order."""
        clean = AttackedGraph.clean(toy_graph)
        rows = dump_embeddings(toy_victim, [1, 0], clean)
        assert rows.shape == (2, 2)
        np.testing.assert_allclose(rows[1], [np.sqrt(0.125), 0.0])


class TestVictimCheckpoint:
    """Tests for victim persistence."""

    def test_save_then_load_answers_identically(self, random_victim, random_graph, tmp_path):
        """Test that a restored victim gives bit-identical clean predictions."""
        save_victim(random_victim, tmp_path / "victim.json")
        restored = load_victim(tmp_path / "victim.json", random_graph)
        for v in range(random_graph.num_nodes):
            np.testing.assert_array_equal(
                restored.clean_prediction(v), random_victim.clean_prediction(v)
            )
        assert restored.metadata == random_victim.metadata

    def test_load_against_other_graph(self, random_victim, toy_graph, tmp_path):
        """Test that a checkpoint for another feature width is refused."""
        save_victim(random_victim, tmp_path / "victim.json")
        with pytest.raises(ConfigurationError):
            load_victim(tmp_path / "victim.json", toy_graph)


class TestBlackBoxOracle:
    """Tests for the attacker-facing view."""

    def test_query_interface_passes_through(self, toy_victim, toy_graph):
        """Test that the whitelisted names reach the handle."""
        oracle = seal(toy_victim)
        clean = AttackedGraph.clean(toy_graph)
        np.testing.assert_allclose(oracle.query(0, clean), toy_victim.clean_prediction(0))
        assert oracle.clean_label(0) == 0
        assert oracle.num_classes == 2
        assert oracle.target_loss(0, clean) > 0
        assert oracle.query_count == 2

    @pytest.mark.parametrize("name", ["_handle", "_model", "_graph", "hidden_embeddings", "graph"])
    def test_internals_are_refused(self, toy_victim, name):
        """Test that any other attribute raises BlackBoxViolationError."""
        oracle = seal(toy_victim)
        with pytest.raises(BlackBoxViolationError):
            getattr(oracle, name)

    def test_refusal_is_an_attribute_error(self, toy_victim):
        """Test that hasattr sees refused names as missing."""
        assert not hasattr(seal(toy_victim), "_model")

    def test_setattr_is_refused(self, toy_victim):
        """Test that the oracle cannot be modified."""
        oracle = seal(toy_victim)
        with pytest.raises(BlackBoxViolationError):
            oracle.query = None

    def test_repr_hides_handle(self, toy_victim):
        """Test that the repr reveals nothing about the victim."""
        assert repr(BlackBoxOracle(toy_victim)) == "BlackBoxOracle()"
