"""Data ingestion and synthetic benchmark generation.

File formats
------------
- matrix files: comma-delimited decimals, one row per line, ``#`` comments
- label files: one label string per line, aligned to matrix rows
- word-vector files: ``token v1 v2 ... vD`` per line, single-space separated
- prototype files: ``label_a|label_b,v1,...,vD`` per line

All loaders are pure and the returned structures are treated as immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyInputError,
    FormatError,
    InvalidParameter,
    ParseError,
    ShapeError,
)


@dataclass
class FeatureMatrix:
    """Dense row-major matrix of n instances by d features for one view."""

    data: np.ndarray
    view_name: str = ""

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeError(f"feature matrix must be 2-D, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeError(f"feature matrix must be at least 1x1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ParseError("feature matrix contains non-finite entries")
        self.data = arr

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]


def as_array(x) -> np.ndarray:
    """Accept a FeatureMatrix or a plain 2-D array-like; return float64 ndarray."""
    if isinstance(x, FeatureMatrix):
        return x.data
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    return arr


@dataclass
class LabelVocabulary:
    """Ordered list of unique label names, marked auxiliary or target."""

    names: list[str]
    role: str = "target"

    def __post_init__(self):
        if not self.names:
            raise InvalidParameter("label vocabulary is empty")
        if len(set(self.names)) != len(self.names):
            raise InvalidParameter("label vocabulary contains duplicates")
        if self.role not in ("auxiliary", "target"):
            raise InvalidParameter(f"unknown vocabulary role {self.role!r}")

    def __len__(self) -> int:
        return len(self.names)


@dataclass
class WordVectorTable:
    """Map from label token to a fixed-dimension embedding vector."""

    dim: int
    entries: dict[str, np.ndarray]
    warnings: list[str] = field(default_factory=list)

    def vector(self, token: str) -> np.ndarray:
        return self.entries[token]

    def __contains__(self, token: str) -> bool:
        return token in self.entries


@dataclass
class PrototypeSet:
    """Named label-set prototypes as vectors in one shared space.

    Each item pairs a sorted tuple of labels with its prototype vector.
    """

    space_dim: int
    items: list[tuple[tuple[str, ...], np.ndarray]]

    def __post_init__(self):
        seen = set()
        norm_items = []
        for labels, vec in self.items:
            key = tuple(sorted(labels))
            if key in seen:
                raise InvalidParameter(f"duplicate prototype label set {key}")
            seen.add(key)
            v = np.asarray(vec, dtype=np.float64).reshape(-1)
            if v.shape[0] != self.space_dim:
                raise ShapeError(
                    f"prototype {key} has dim {v.shape[0]}, expected {self.space_dim}"
                )
            if not np.all(np.isfinite(v)):
                raise ParseError(f"prototype {key} contains non-finite entries")
            norm_items.append((key, v))
        self.items = norm_items

    def __len__(self) -> int:
        return len(self.items)

    @property
    def label_sets(self) -> list[tuple[str, ...]]:
        return [labels for labels, _ in self.items]

    @property
    def vectors(self) -> np.ndarray:
        return np.vstack([v for _, v in self.items])


@dataclass
class SynthBenchmark:
    """Deterministic synthetic zero-shot benchmark with a controllable shift.

    Auxiliary instances carry instance-level semantic targets; target classes
    expose only a prototype table whose vectors are displaced from the images
    of the generating semantic map by ``shift_magnitude``.
    """

    aux_features: FeatureMatrix
    aux_semantics: FeatureMatrix
    aux_labels: list[str]
    target_features: FeatureMatrix
    target_word_vectors: WordVectorTable
    target_true_labels: list[str]
    shift_magnitude: float
    seed: int


# ---------------------------------------------------------------------------
# text formats
# ---------------------------------------------------------------------------


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            yield lineno, stripped


def load_matrix(path, view_name: str = "") -> FeatureMatrix:
    """Load a comma-delimited matrix file.

    Raises FormatError on ragged rows, ParseError on non-numeric or
    non-finite tokens, EmptyInputError when no data rows are present.
    """
    rows = []
    width = None
    for lineno, line in _data_lines(path):
        tokens = line.split(",")
        try:
            row = [float(t) for t in tokens]
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: non-numeric token ({exc})") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise FormatError(
                f"{path}:{lineno}: ragged row of width {len(row)}, expected {width}"
            )
        rows.append(row)
    if not rows:
        raise EmptyInputError(f"{path}: no data rows")
    arr = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{path}: non-finite value in matrix")
    return FeatureMatrix(arr, view_name=view_name)


def write_matrix(matrix, path) -> None:
    """Write a matrix in the comma-delimited text format (repr round-trip)."""
    arr = as_array(matrix)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in arr:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def load_labels(path) -> list[str]:
    """Load one label per line, aligned by line number to matrix rows."""
    labels = [line for _, line in _data_lines(path)]
    if not labels:
        raise EmptyInputError(f"{path}: no labels")
    return labels


def write_labels(labels, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for name in labels:
            fh.write(f"{name}\n")


def load_label_sets(path) -> list[set[str]]:
    """Load one ``|``-joined label set per line."""
    sets = [set(line.split("|")) for _, line in _data_lines(path)]
    if not sets:
        raise EmptyInputError(f"{path}: no label sets")
    return sets


def write_label_sets(label_sets, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for labels in label_sets:
            fh.write("|".join(sorted(labels)))
            fh.write("\n")


def load_word_vectors(path) -> WordVectorTable:
    """Load ``token v1 ... vD`` lines.

    Duplicate tokens resolve last-wins and are recorded in the returned
    table's warning list. Inconsistent dimensions raise FormatError.
    """
    entries: dict[str, np.ndarray] = {}
    warnings: list[str] = []
    dim = None
    count = 0
    for lineno, line in _data_lines(path):
        parts = line.split(" ")
        token, values = parts[0], parts[1:]
        if not values:
            raise FormatError(f"{path}:{lineno}: token {token!r} has no values")
        try:
            vec = np.array([float(v) for v in values], dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: non-numeric token ({exc})") from None
        if not np.all(np.isfinite(vec)):
            raise ParseError(f"{path}:{lineno}: non-finite vector entry")
        if dim is None:
            dim = vec.shape[0]
        elif vec.shape[0] != dim:
            raise FormatError(
                f"{path}:{lineno}: vector of dim {vec.shape[0]}, expected {dim}"
            )
        if token in entries:
            warnings.append(f"duplicate token {token!r} at line {lineno}: last wins")
        entries[token] = vec
        count += 1
    if count == 0:
        raise EmptyInputError(f"{path}: no word vectors")
    return WordVectorTable(dim=int(dim), entries=entries, warnings=warnings)


def write_word_vectors(table: WordVectorTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for token, vec in table.entries.items():
            fh.write(token + " " + " ".join(repr(float(v)) for v in vec))
            fh.write("\n")


def load_prototypes(path) -> PrototypeSet:
    """Load ``label_a|label_b,v1,...,vD`` prototype lines."""
    items = []
    dim = None
    for lineno, line in _data_lines(path):
        head, *values = line.split(",")
        labels = tuple(sorted(head.split("|")))
        if not values:
            raise FormatError(f"{path}:{lineno}: prototype {head!r} has no vector")
        try:
            vec = np.array([float(v) for v in values], dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: non-numeric token ({exc})") from None
        if dim is None:
            dim = vec.shape[0]
        elif vec.shape[0] != dim:
            raise FormatError(
                f"{path}:{lineno}: vector of dim {vec.shape[0]}, expected {dim}"
            )
        items.append((labels, vec))
    if not items:
        raise EmptyInputError(f"{path}: no prototypes")
    return PrototypeSet(space_dim=int(dim), items=items)


def write_prototypes(protos: PrototypeSet, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for labels, vec in protos.items:
            fh.write("|".join(labels) + "," + ",".join(repr(float(v)) for v in vec))
            fh.write("\n")


# ---------------------------------------------------------------------------
# synthetic benchmark
# ---------------------------------------------------------------------------


def _spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    # Philox is counter-based; SeedSequence spawning keeps streams independent
    # of each other and of how many draws earlier streams consume.
    root = np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.Philox(child)) for child in root.spawn(n)]


def _separated_centers(rng, k: int, dim: int, min_separation: float) -> np.ndarray:
    """Sample k Gaussian centers with pairwise distance >= min_separation."""
    scale = max(min_separation, 1.0)
    centers: list[np.ndarray] = []
    rejects = 0
    while len(centers) < k:
        cand = rng.normal(scale=scale, size=dim)
        if all(np.linalg.norm(cand - c) >= min_separation for c in centers):
            centers.append(cand)
            rejects = 0
        else:
            rejects += 1
            if rejects >= 200:
                scale *= 1.5
                rejects = 0
    return np.array(centers)


def mean_pairwise_distance(vectors) -> float:
    """Mean Euclidean distance over unordered pairs of rows."""
    arr = as_array(vectors)
    n = arr.shape[0]
    if n < 2:
        return 0.0
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            total += float(np.linalg.norm(arr[i] - arr[j]))
    return total / (n * (n - 1) / 2)


def prototype_spacing(bench: SynthBenchmark) -> float:
    """Mean pairwise distance between the benchmark's target prototypes."""
    mat = np.vstack([bench.target_word_vectors.entries[name]
                     for name in sorted(bench.target_word_vectors.entries)])
    return mean_pairwise_distance(mat)


def synth_benchmark(
    n_aux_classes: int,
    n_target_classes: int,
    per_class: int,
    feat_dim: int,
    sem_dim: int,
    shift_magnitude: float,
    seed: int,
    *,
    cluster_std: float = 1.0,
    min_separation: float | None = None,
) -> SynthBenchmark:
    """Generate a deterministic synthetic zero-shot benchmark.

    Feature clusters are isotropic Gaussians around well-separated random
    centers. Class-level semantic vectors are a fixed linear map of the
    centers; each target class prototype is additionally displaced by a
    random direction of norm ``shift_magnitude``, so a projection fitted on
    auxiliary data is biased against the published target prototypes. All
    randomness is a pure function of ``seed`` and is drawn independently of
    ``shift_magnitude``, so regenerating with a different shift reuses the
    identical geometry.
    """
    for name, value in (
        ("n_aux_classes", n_aux_classes),
        ("n_target_classes", n_target_classes),
        ("per_class", per_class),
        ("feat_dim", feat_dim),
        ("sem_dim", sem_dim),
    ):
        if int(value) < 1:
            raise InvalidParameter(f"{name} must be >= 1, got {value}")
    if shift_magnitude < 0:
        raise InvalidParameter(f"shift_magnitude must be >= 0, got {shift_magnitude}")
    if cluster_std <= 0:
        raise InvalidParameter(f"cluster_std must be > 0, got {cluster_std}")
    if min_separation is None:
        min_separation = 12.0 * cluster_std

    rng_centers, rng_map, rng_aux, rng_target, rng_shift = _spawn_rngs(seed, 5)

    n_classes = n_aux_classes + n_target_classes
    centers = _separated_centers(rng_centers, n_classes, feat_dim, min_separation)
    sem_map = rng_map.normal(size=(feat_dim, sem_dim)) / math.sqrt(feat_dim)
    class_sem = centers @ sem_map

    directions = rng_shift.normal(size=(n_target_classes, sem_dim))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    directions = directions / norms

    aux_names = [f"aux_{c:02d}" for c in range(n_aux_classes)]
    target_names = [f"tgt_{c:02d}" for c in range(n_target_classes)]

    aux_rows, aux_sem_rows, aux_labels = [], [], []
    for c in range(n_aux_classes):
        noise = rng_aux.normal(scale=cluster_std, size=(per_class, feat_dim))
        aux_rows.append(centers[c] + noise)
        aux_sem_rows.append(np.tile(class_sem[c], (per_class, 1)))
        aux_labels.extend([aux_names[c]] * per_class)

    target_rows, target_labels = [], []
    for c in range(n_target_classes):
        noise = rng_target.normal(scale=cluster_std, size=(per_class, feat_dim))
        target_rows.append(centers[n_aux_classes + c] + noise)
        target_labels.extend([target_names[c]] * per_class)

    prototypes = class_sem[n_aux_classes:] + shift_magnitude * directions
    table = WordVectorTable(
        dim=sem_dim,
        entries={target_names[c]: prototypes[c] for c in range(n_target_classes)},
    )

    return SynthBenchmark(
        aux_features=FeatureMatrix(np.vstack(aux_rows), view_name="features"),
        aux_semantics=FeatureMatrix(np.vstack(aux_sem_rows), view_name="semantics"),
        aux_labels=aux_labels,
        target_features=FeatureMatrix(np.vstack(target_rows), view_name="features"),
        target_word_vectors=table,
        target_true_labels=target_labels,
        shift_magnitude=float(shift_magnitude),
        seed=int(seed),
    )
