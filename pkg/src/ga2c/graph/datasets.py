"""Dataset loading, writing and download.

Two on-disk formats are supported:

- ``canonical_json``: a single JSON document (see :class:`CanonicalDataset`).
- ``content_cites``: the plain-text citation pair ``<name>.content``
  (``node_id<TAB>f1 ... fF<TAB>label``) and ``<name>.cites``
  (``cited<TAB>citing``), with public splits in ``<name>.splits.json``.
"""

import io
import json
import logging
import tarfile
from pathlib import Path
from typing import Literal

import httpx
import numpy as np
from pydantic import ValidationError

from ga2c.config import DataSettings
from ga2c.graph.graph import SPLIT_NAMES, Graph
from ga2c.models.dataset import CanonicalDataset, SplitFile
from ga2c.utils.errors import ConfigurationError, DownloadError, FeatureValidationError, ParseError
from ga2c.utils.io import atomic_write_json, atomic_write_text
from ga2c.utils.retry import RetryError, retry_with_backoff

logger = logging.getLogger(__name__)

DatasetFormat = Literal["canonical_json", "content_cites"]

# Archives published on the LINQS dataset page
DOWNLOADABLE_DATASETS = ("cora", "citeseer")

# Planetoid public split sizes
TRAIN_PER_CLASS = 20
NUM_VAL = 500
NUM_TEST = 1000


def detect_format(path: Path) -> DatasetFormat:
    """Guess the format of ``path``: a ``.json`` file or a content/cites prefix."""
    path = Path(path)
    if path.suffix == ".json" and path.is_file():
        return "canonical_json"
    prefix = _content_prefix(path)
    if prefix.with_suffix(".content").is_file():
        return "content_cites"
    raise ConfigurationError(f"No dataset found at {path}")


def _content_prefix(path: Path) -> Path:
    # data/cora and data/cora/cora both name data/cora/cora.{content,cites}
    path = Path(path)
    if path.is_dir():
        return path / path.name
    return path.with_suffix("") if path.suffix in (".content", ".cites") else path


def locate_dataset(name: str, data_dir: Path) -> Path:
    """Resolve a dataset name or path against the data directory.

    Lookup order: an existing path as given, ``<data_dir>/<name>.json``,
    then ``<data_dir>/<name>/``.

    Raises:
        ConfigurationError: If none of these exist.
    """
    candidates = [Path(name), Path(data_dir) / f"{name}.json", Path(data_dir) / name]
    for candidate in candidates:
        if candidate.exists():
            return candidate
    raise ConfigurationError(f"Dataset {name!r} not found in {data_dir}")


def load_dataset(
    path: Path,
    format: DatasetFormat | None = None,
    split_seed: int = 0,
) -> Graph:
    """Load a graph from disk.

    Args:
        path: JSON file, or directory/prefix of a content/cites pair.
        format: Explicit format; detected from ``path`` when None.
        split_seed: Seed for generated splits when a content/cites dataset
            has no split file.

    Raises:
        ConfigurationError: If the files do not exist.
        ParseError: On a malformed row or document.
        FeatureValidationError: On inconsistent counts or splits.
    """
    path = Path(path)
    format = format or detect_format(path)
    if format == "canonical_json":
        graph = _load_canonical(path)
    else:
        graph = _load_content_cites(path, split_seed)
    logger.info(
        f"Loaded dataset {graph.name}: {graph.num_nodes} nodes, {graph.num_edges} edges, "
        f"{graph.num_features} features, {graph.num_classes} classes",
        extra={"dataset": graph.name},
    )
    return graph


def _load_canonical(path: Path) -> Graph:
    if not path.is_file():
        raise ConfigurationError(f"Dataset file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, line_number=e.lineno, path=str(path)) from e
    try:
        doc = CanonicalDataset.model_validate(raw)
    except ValidationError as e:
        raise FeatureValidationError(f"{path}: {e}") from e
    if doc.labels is not None and len(doc.labels) != doc.num_nodes:
        raise FeatureValidationError(f"{len(doc.labels)} labels for {doc.num_nodes} nodes")
    return Graph.from_lists(
        num_nodes=doc.num_nodes,
        edges=doc.edges,
        features=doc.features,
        num_features=doc.num_features,
        labels=doc.labels,
        splits=doc.splits,
        num_classes=doc.num_classes,
        name=path.stem,
    )


def _class_ids(label_names: list[str]) -> tuple[list[int], int]:
    # Integer names keep their value so canonical -> content -> canonical is exact
    if all(name.lstrip("-").isdigit() for name in label_names):
        ids = [int(name) for name in label_names]
        if min(ids, default=0) >= 0:
            return ids, max(ids, default=-1) + 1
    classes = sorted(set(label_names))
    lookup = {name: i for i, name in enumerate(classes)}
    return [lookup[name] for name in label_names], len(classes)


def _load_content_cites(path: Path, split_seed: int) -> Graph:
    prefix = _content_prefix(path)
    content_path = prefix.with_suffix(".content")
    cites_path = prefix.with_suffix(".cites")
    for required in (content_path, cites_path):
        if not required.is_file():
            raise ConfigurationError(f"Dataset file not found: {required}")

    node_ids: list[str] = []
    features: list[list[int]] = []
    label_names: list[str] = []
    num_features: int | None = None
    with open(content_path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            fields = line.rstrip("\n").split()
            if not fields:
                continue
            if len(fields) < 3:
                raise ParseError(
                    "expected node id, features and label",
                    line_number=line_number,
                    path=str(content_path),
                )
            width = len(fields) - 2
            if num_features is None:
                num_features = width
            elif width != num_features:
                raise ParseError(
                    f"row has {width} features, earlier rows have {num_features}",
                    line_number=line_number,
                    path=str(content_path),
                )
            try:
                values = np.asarray(fields[1:-1], dtype=np.float64)
            except ValueError as e:
                raise ParseError(
                    f"non-numeric feature value: {e}",
                    line_number=line_number,
                    path=str(content_path),
                ) from e
            node_ids.append(fields[0])
            features.append(np.flatnonzero(values).tolist())
            label_names.append(fields[-1])

    index = {node_id: i for i, node_id in enumerate(node_ids)}
    if len(index) != len(node_ids):
        raise FeatureValidationError(f"{content_path}: duplicate node ids")

    edges: list[tuple[int, int]] = []
    skipped = 0
    with open(cites_path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 2:
                raise ParseError(
                    "expected '<cited> <citing>'", line_number=line_number, path=str(cites_path)
                )
            cited, citing = fields
            if cited not in index or citing not in index:
                skipped += 1
                continue
            u, v = index[cited], index[citing]
            if u != v:
                edges.append((u, v))
    if skipped:
        logger.warning(
            f"Skipped {skipped} citation rows referencing unknown node ids",
            extra={"dataset": prefix.name},
        )

    labels, num_classes = _class_ids(label_names)
    splits = _load_or_make_splits(prefix, index, np.asarray(labels), num_classes, split_seed)
    return Graph.from_lists(
        num_nodes=len(node_ids),
        edges=edges,
        features=features,
        num_features=num_features or 0,
        labels=labels,
        splits=splits,
        num_classes=num_classes,
        name=prefix.name,
    )


def _load_or_make_splits(
    prefix: Path,
    index: dict[str, int],
    labels: np.ndarray,
    num_classes: int,
    split_seed: int,
) -> dict[str, list[int]]:
    split_path = prefix.with_suffix(".splits.json")
    if not split_path.is_file():
        logger.warning(
            f"No split file at {split_path}, generating a public-style split",
            extra={"dataset": prefix.name, "seed": split_seed},
        )
        rng = np.random.default_rng(split_seed)
        return {k: v.tolist() for k, v in make_planetoid_splits(labels, num_classes, rng).items()}
    try:
        split_file = SplitFile.model_validate_json(split_path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise FeatureValidationError(f"{split_path}: {e}") from e
    splits: dict[str, list[int]] = {}
    for name in SPLIT_NAMES:
        ids = []
        for node_id in getattr(split_file, name):
            if str(node_id) not in index:
                raise FeatureValidationError(f"{split_path}: unknown node id {node_id!r}")
            ids.append(index[str(node_id)])
        splits[name] = ids
    return splits


def make_planetoid_splits(
    labels: np.ndarray,
    num_classes: int,
    rng: np.random.Generator,
    per_class: int = TRAIN_PER_CLASS,
    num_val: int = NUM_VAL,
    num_test: int = NUM_TEST,
) -> dict[str, np.ndarray]:
    """Draw ``per_class`` training nodes per class, then validation and test nodes.

    On graphs too small for the full sizes the remainder is halved between
    validation and test.
    """
    labels = np.asarray(labels)
    train: list[int] = []
    for c in range(num_classes):
        members = np.flatnonzero(labels == c)
        take = min(per_class, members.size)
        train.extend(rng.choice(members, size=take, replace=False).tolist())
    train_set = set(train)
    rest = np.array([i for i in rng.permutation(labels.size) if i not in train_set], dtype=np.int64)
    val_size = min(num_val, rest.size // 2)
    test_size = min(num_test, rest.size - val_size)
    return {
        "train": np.sort(np.asarray(train, dtype=np.int64)),
        "val": np.sort(rest[:val_size]),
        "test": np.sort(rest[val_size : val_size + test_size]),
    }


def write_canonical(graph: Graph, path: Path) -> None:
    """Write ``graph`` as a canonical JSON document."""
    doc = CanonicalDataset(
        num_nodes=graph.num_nodes,
        num_features=graph.num_features,
        num_classes=graph.num_classes,
        edges=[(int(u), int(v)) for u, v in graph.edge_list()],
        features=[graph.feature_indices(v).tolist() for v in range(graph.num_nodes)],
        labels=None if graph.labels is None else graph.labels.tolist(),
        splits={name: graph.splits[name].tolist() for name in SPLIT_NAMES},
    )
    atomic_write_json(path, doc)


def write_content_cites(graph: Graph, directory: Path, name: str | None = None) -> Path:
    """Write ``graph`` as ``<name>.content``, ``<name>.cites`` and ``<name>.splits.json``.

    Node ids are the row indices; labels are written as integers.

    Returns:
        The directory the files were written to.
    """
    if graph.labels is None:
        raise FeatureValidationError("content/cites format requires labels")
    name = name or graph.name
    directory = Path(directory)
    content = io.StringIO()
    dense = graph.features.toarray()
    for v in range(graph.num_nodes):
        row = "\t".join(str(int(x)) for x in dense[v])
        content.write(f"{v}\t{row}\t{int(graph.labels[v])}\n")
    cites = "".join(f"{int(u)}\t{int(v)}\n" for u, v in graph.edge_list())
    atomic_write_text(directory / f"{name}.content", content.getvalue())
    atomic_write_text(directory / f"{name}.cites", cites)
    atomic_write_json(
        directory / f"{name}.splits.json",
        {split: graph.splits[split].tolist() for split in SPLIT_NAMES},
    )
    return directory


def _fetch_archive(client: httpx.Client, url: str) -> bytes:
    response = client.get(url)
    response.raise_for_status()
    return response.content


def fetch_dataset(name: str, settings: DataSettings, split_seed: int = 0) -> Path:
    """Download and unpack a LINQS citation archive into the data directory.

    A split file is generated next to the extracted files when absent.

    Returns:
        The dataset directory, loadable with :func:`load_dataset`.

    Raises:
        ConfigurationError: If ``name`` is not downloadable.
        DownloadError: If the archive cannot be fetched or unpacked.
    """
    if name not in DOWNLOADABLE_DATASETS:
        raise ConfigurationError(
            f"Dataset {name!r} is not downloadable; choose from {', '.join(DOWNLOADABLE_DATASETS)}"
        )
    url = f"{settings.download_base_url.rstrip('/')}/{name}.tgz"
    target = Path(settings.data_dir)
    target.mkdir(parents=True, exist_ok=True)
    logger.info(f"Downloading {url}", extra={"dataset": name})

    try:
        timeout = settings.download_timeout_seconds
        with httpx.Client(timeout=timeout, follow_redirects=True) as client:
            payload = retry_with_backoff(
                _fetch_archive, client, url, max_retries=settings.max_retries
            )
    except RetryError as e:
        raise DownloadError(f"{url}: {e}") from e
    except httpx.HTTPError as e:
        raise DownloadError(f"{url}: {type(e).__name__}: {e}") from e

    try:
        with tarfile.open(fileobj=io.BytesIO(payload), mode="r:gz") as archive:
            archive.extractall(target, filter="data")
    except (tarfile.TarError, OSError) as e:
        raise DownloadError(f"{url}: cannot unpack archive: {e}") from e

    directory = target / name
    prefix = directory / name
    if not prefix.with_suffix(".content").is_file():
        raise DownloadError(f"{url}: archive does not contain {name}/{name}.content")

    split_path = prefix.with_suffix(".splits.json")
    if not split_path.is_file():
        graph = _load_content_cites(directory, split_seed)
        node_ids = [line.split(maxsplit=1)[0] for line in _content_lines(prefix)]
        atomic_write_json(
            split_path,
            SplitFile(**{s: [node_ids[i] for i in graph.splits[s]] for s in SPLIT_NAMES}),
        )
        logger.info(f"Wrote generated split to {split_path}", extra={"dataset": name})
    return directory


def _content_lines(prefix: Path) -> list[str]:
    with open(prefix.with_suffix(".content"), encoding="utf-8") as f:
        return [line for line in f if line.strip()]
