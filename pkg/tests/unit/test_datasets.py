"""Tests for dataset loading, writing and download."""

import io
import json
import tarfile

import httpx
import numpy as np
import pytest
import respx

from ga2c.config import DataSettings
from ga2c.graph.datasets import (
    detect_format,
    fetch_dataset,
    load_dataset,
    locate_dataset,
    make_planetoid_splits,
    write_canonical,
    write_content_cites,
)
from ga2c.utils.errors import (
    ConfigurationError,
    DownloadError,
    FeatureValidationError,
    ParseError,
)

CONTENT = "p1\t0\t1\t0\tA\np2\t1\t0\t0\tB\np3\t0\t0\t1\tA\n"
CITES = "p1\tp2\np2\tp3\np1\tunknown\n"


def _write_citation_files(directory, name="tiny", content=CONTENT, cites=CITES):
    directory.mkdir(parents=True, exist_ok=True)
    (directory / f"{name}.content").write_text(content)
    (directory / f"{name}.cites").write_text(cites)
    return directory


def _archive(name: str) -> bytes:
    buffer = io.BytesIO()
    with tarfile.open(fileobj=buffer, mode="w:gz") as archive:
        for suffix, text in ((".content", CONTENT), (".cites", CITES)):
            data = text.encode()
            info = tarfile.TarInfo(f"{name}/{name}{suffix}")
            info.size = len(data)
            archive.addfile(info, io.BytesIO(data))
    return buffer.getvalue()


class TestContentCites:
    """Tests for the plain-text citation format."""

    def test_load_with_string_labels(self, tmp_path):
        """Test features, edges and sorted class names."""
        directory = _write_citation_files(tmp_path / "tiny")
        (directory / "tiny.splits.json").write_text(
            json.dumps({"train": ["p1"], "val": ["p2"], "test": ["p3"]})
        )
        g = load_dataset(directory)
        assert g.name == "tiny"
        assert g.num_nodes == 3
        assert g.num_features == 3
        assert g.num_classes == 2
        np.testing.assert_array_equal(g.labels, [0, 1, 0])
        np.testing.assert_array_equal(g.feature_indices(0), [1])
        np.testing.assert_array_equal(g.edge_list(), [[0, 1], [1, 2]])
        np.testing.assert_array_equal(g.splits["test"], [2])

    def test_missing_split_file_generates_split(self, tmp_path):
        """Test that a split is generated when none is stored."""
        g = load_dataset(_write_citation_files(tmp_path / "tiny"))
        assert g.splits["train"].size == 3
        assert g.has_splits() is False

    def test_inconsistent_width_reports_line(self, tmp_path):
        """Test that a short row names its line number."""
        content = "p1\t0\t1\tA\np2\t1\tB\n"
        directory = _write_citation_files(tmp_path / "tiny", content=content)
        with pytest.raises(ParseError) as exc_info:
            load_dataset(directory)
        assert exc_info.value.line_number == 2

    def test_non_numeric_feature(self, tmp_path):
        """Test that a non-numeric value is a parse error."""
        content = "p1\t0\tx\tA\n"
        directory = _write_citation_files(tmp_path / "tiny", content=content, cites="")
        with pytest.raises(ParseError) as exc_info:
            load_dataset(directory)
        assert exc_info.value.line_number == 1

    def test_malformed_cites_row(self, tmp_path):
        """Test that a citation row must have two fields."""
        directory = _write_citation_files(tmp_path / "tiny", cites="p1\tp2\np3\n")
        with pytest.raises(ParseError) as exc_info:
            load_dataset(directory)
        assert exc_info.value.line_number == 2

    def test_duplicate_node_ids(self, tmp_path):
        """Test that node ids must be unique."""
        content = "p1\t0\tA\np1\t1\tB\n"
        directory = _write_citation_files(tmp_path / "tiny", content=content, cites="")
        with pytest.raises(FeatureValidationError):
            load_dataset(directory)

    def test_unknown_split_id(self, tmp_path):
        """Test that split ids must exist in the content file."""
        directory = _write_citation_files(tmp_path / "tiny")
        (directory / "tiny.splits.json").write_text(json.dumps({"train": ["nope"]}))
        with pytest.raises(FeatureValidationError):
            load_dataset(directory)

    def test_write_then_load_preserves_graph(self, toy_graph, tmp_path):
        """Test that writing the toy graph and loading it gives the same graph."""
        directory = write_content_cites(toy_graph, tmp_path / "toy")
        g = load_dataset(directory)
        assert (g.adjacency != toy_graph.adjacency).nnz == 0
        assert (g.features != toy_graph.features).nnz == 0
        np.testing.assert_array_equal(g.labels, toy_graph.labels)
        for split in ("train", "val", "test"):
            np.testing.assert_array_equal(g.splits[split], toy_graph.splits[split])


class TestCanonicalJson:
    """Tests for the canonical JSON format."""

    def test_write_then_load(self, toy_graph, tmp_path):
        """Test that the canonical document loads back the same graph."""
        path = tmp_path / "toy.json"
        write_canonical(toy_graph, path)
        assert detect_format(path) == "canonical_json"
        g = load_dataset(path)
        assert g.name == "toy"
        assert (g.adjacency != toy_graph.adjacency).nnz == 0
        assert (g.features != toy_graph.features).nnz == 0
        np.testing.assert_array_equal(g.splits["val"], toy_graph.splits["val"])

    def test_malformed_json_reports_line(self, tmp_path):
        """Test that a JSON syntax error carries its line number."""
        path = tmp_path / "bad.json"
        path.write_text('{\n"num_nodes": 1,\n oops\n}')
        with pytest.raises(ParseError) as exc_info:
            load_dataset(path)
        assert exc_info.value.line_number == 3

    def test_label_count_mismatch(self, tmp_path):
        """Test that labels must cover every node."""
        path = tmp_path / "bad.json"
        doc = {
            "num_nodes": 2,
            "num_features": 1,
            "num_classes": 1,
            "edges": [],
            "features": [[], []],
            "labels": [0],
        }
        path.write_text(json.dumps(doc))
        with pytest.raises(FeatureValidationError):
            load_dataset(path)


class TestLocateDataset:
    """Tests for dataset lookup."""

    def test_json_then_directory(self, tmp_path):
        """Test that <name>.json is preferred over <name>/."""
        (tmp_path / "cora").mkdir()
        assert locate_dataset("cora", tmp_path) == tmp_path / "cora"
        (tmp_path / "cora.json").write_text("{}")
        assert locate_dataset("cora", tmp_path) == tmp_path / "cora.json"

    def test_missing_dataset(self, tmp_path):
        """Test that an unknown name is a configuration error."""
        with pytest.raises(ConfigurationError):
            locate_dataset("nothing", tmp_path)

    def test_detect_missing(self, tmp_path):
        """Test that detection fails for an empty directory."""
        with pytest.raises(ConfigurationError):
            detect_format(tmp_path / "void")


class TestPlanetoidSplits:
    """Tests for generated public-style splits."""

    def test_sizes_and_disjointness(self):
        """Test per-class training nodes and halved remainder."""
        labels = np.repeat([0, 1, 2], 30)
        splits = make_planetoid_splits(labels, 3, np.random.default_rng(0))
        assert splits["train"].size == 60
        assert splits["val"].size == 15
        assert splits["test"].size == 15
        for c in range(3):
            assert np.sum(labels[splits["train"]] == c) == 20
        union = np.concatenate(list(splits.values()))
        assert np.unique(union).size == union.size

    def test_seeded(self):
        """Test that the same seed gives the same split."""
        labels = np.repeat([0, 1], 40)
        a = make_planetoid_splits(labels, 2, np.random.default_rng(5))
        b = make_planetoid_splits(labels, 2, np.random.default_rng(5))
        for split in a:
            np.testing.assert_array_equal(a[split], b[split])


class TestFetchDataset:
    """Tests for dataset download."""

    def test_unknown_name(self, tmp_path):
        """Test that only published archives can be fetched."""
        with pytest.raises(ConfigurationError):
            fetch_dataset("pubmed", DataSettings(data_dir=tmp_path))

    @respx.mock
    def test_download_and_unpack(self, tmp_path):
        """Test that the archive is unpacked and a split file is written."""
        settings = DataSettings(data_dir=tmp_path, download_base_url="https://example.test/lbc")
        respx.get("https://example.test/lbc/cora.tgz").mock(
            return_value=httpx.Response(200, content=_archive("cora"))
        )
        directory = fetch_dataset("cora", settings)
        assert directory == tmp_path / "cora"
        assert (directory / "cora.splits.json").is_file()
        g = load_dataset(directory)
        assert g.num_nodes == 3
        assert g.num_edges == 2

    @respx.mock
    def test_not_found_is_download_error(self, tmp_path):
        """Test that a 404 fails without retrying."""
        settings = DataSettings(data_dir=tmp_path, download_base_url="https://example.test/lbc")
        route = respx.get("https://example.test/lbc/cora.tgz").mock(
            return_value=httpx.Response(404)
        )
        with pytest.raises(DownloadError):
            fetch_dataset("cora", settings)
        assert route.call_count == 1

    @respx.mock
    def test_server_error_exhausts_retries(self, tmp_path):
        """Test that a 503 on the only attempt becomes a DownloadError."""
        settings = DataSettings(
            data_dir=tmp_path, download_base_url="https://example.test/lbc", max_retries=1
        )
        respx.get("https://example.test/lbc/cora.tgz").mock(return_value=httpx.Response(503))
        with pytest.raises(DownloadError):
            fetch_dataset("cora", settings)

    @respx.mock
    def test_corrupt_archive(self, tmp_path):
        """Test that a non-archive payload is a DownloadError."""
        settings = DataSettings(data_dir=tmp_path, download_base_url="https://example.test/lbc")
        respx.get("https://example.test/lbc/cora.tgz").mock(
            return_value=httpx.Response(200, content=b"not a tarball")
        )
        with pytest.raises(DownloadError):
            fetch_dataset("cora", settings)
