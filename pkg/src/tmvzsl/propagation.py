"""Semi-supervised label propagation from prototypes, model averaging over
multiple graphs, and the full transductive multi-view hypergraph pipeline.
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .dataset import PrototypeSet, as_array
from .errors import InvalidParameter, ShapeError
from .graph import (
    Hypergraph,
    PropagationOperator,
    hypergraph_heterogeneous,
    hypergraph_homogeneous,
    propagation_operator,
)

DEFAULT_ALPHA = 0.85
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 1000


@dataclass
class LabelScores:
    """n x C matrix of per-class soft scores with an ordered class list."""

    F: np.ndarray
    class_names: list[str]
    converged: bool = True
    n_iter: int = 0

    @property
    def n(self) -> int:
        return self.F.shape[0]

    def predictions(self) -> list[str]:
        # argmax ties resolve to the lowest class index
        return [self.class_names[int(np.argmax(row))] for row in self.F]


@dataclass
class SeedMatrix:
    """One-hot seeds at prototype rows, zero elsewhere."""

    Y0: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.Y0, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeError("seed matrix must be 2-D")
        self.Y0 = arr

    @property
    def n(self) -> int:
        return self.Y0.shape[0]

    @property
    def n_classes(self) -> int:
        return self.Y0.shape[1]

    @property
    def prototype_rows(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.Y0.any(axis=1))]

    def prototype_class(self, row: int) -> int:
        return int(np.argmax(self.Y0[row]))


def seed_matrix(n_data: int, n_classes: int) -> SeedMatrix:
    """Seeds for n_data unlabeled rows followed by one prototype per class."""
    Y0 = np.zeros((n_data + n_classes, n_classes))
    for c in range(n_classes):
        Y0[n_data + c, c] = 1.0
    return SeedMatrix(Y0)


def propagate(
    S,
    Y0,
    alpha: float = DEFAULT_ALPHA,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    class_names: list[str] | None = None,
) -> LabelScores:
    """Iterate F <- alpha S F + (1 - alpha) Y0 to its fixed point.

    Converges to (1 - alpha)(I - alpha S)^{-1} Y0. Stops when the max-abs
    update drops below tol; if max_iter is hit first the best iterate is
    returned with converged=False.
    """
    if isinstance(S, PropagationOperator):
        op = S.S
        n = S.n
    else:
        op = S
        n = op.shape[0]
    seeds = Y0.Y0 if isinstance(Y0, SeedMatrix) else np.asarray(Y0, dtype=np.float64)
    if seeds.shape[0] != n:
        raise ShapeError(f"seed matrix has {seeds.shape[0]} rows, operator has {n}")
    if not 0.0 <= alpha < 1.0:
        raise InvalidParameter(f"alpha must be in [0, 1), got {alpha}")

    names = class_names or [f"class_{c}" for c in range(seeds.shape[1])]
    base = (1.0 - alpha) * seeds
    F = seeds.copy()
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        F_next = alpha * (op @ F) + base
        delta = float(np.max(np.abs(F_next - F)))
        F = F_next
        if delta < tol:
            converged = True
            break
    return LabelScores(F=F, class_names=list(names), converged=converged, n_iter=it)


def _evidence(F: np.ndarray, seeds: SeedMatrix) -> float:
    """Product over prototype rows of the row-normalized own-class score."""
    ev = 1.0
    for row in seeds.prototype_rows:
        total = float(F[row].sum())
        if total <= 0.0:
            return 0.0
        ev *= float(F[row, seeds.prototype_class(row)]) / total
    return ev


def bma_combine(
    operators,
    Y0,
    alpha: float = DEFAULT_ALPHA,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    class_names: list[str] | None = None,
    return_weights: bool = False,
):
    """Average per-graph propagations weighted by prototype self-consistency.

    Each graph's evidence is the product over prototype rows of the
    normalized score it assigns the prototype's own class; posterior weights
    use a uniform prior. All-zero evidence falls back to uniform weights.
    """
    if not operators:
        raise InvalidParameter("need at least one operator")
    seeds = Y0 if isinstance(Y0, SeedMatrix) else SeedMatrix(Y0)
    per_graph = [
        propagate(op, seeds, alpha=alpha, tol=tol, max_iter=max_iter,
                  class_names=class_names)
        for op in operators
    ]
    if len(per_graph) == 1:
        result, weights = per_graph[0], np.array([1.0])
    else:
        evidence = np.array([_evidence(r.F, seeds) for r in per_graph])
        total = float(evidence.sum())
        if total <= 0.0:
            _warnings.warn("all graph evidences are zero; using uniform weights")
            weights = np.full(len(per_graph), 1.0 / len(per_graph))
        else:
            weights = evidence / total
        F = np.zeros_like(per_graph[0].F)
        for w, r in zip(weights, per_graph):
            F += w * r.F
        result = LabelScores(
            F=F,
            class_names=per_graph[0].class_names,
            converged=all(r.converged for r in per_graph),
            n_iter=max(r.n_iter for r in per_graph),
        )
    if return_weights:
        return result, weights
    return result


def _class_name(labels: tuple[str, ...]) -> str:
    return "|".join(labels)


def tmv_hlp(
    views,
    prototypes,
    k: int = 10,
    alpha: float = DEFAULT_ALPHA,
    *,
    sigma="auto",
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    return_weights: bool = False,
):
    """Transductive multi-view hypergraph label propagation.

    Appends the per-view embedded prototypes as extra vertices, builds every
    homogeneous hypergraph and every ordered heterogeneous (query, neighbor)
    pair, averages the propagations by evidence, and returns scores for the
    data rows only.
    """
    mats = [as_array(v) for v in views]
    protos: list[PrototypeSet] = list(prototypes)
    if len(mats) != len(protos):
        raise ShapeError(
            f"{len(mats)} views but {len(protos)} prototype sets"
        )
    n = mats[0].shape[0]
    label_sets = protos[0].label_sets
    for v, (Xv, pv) in enumerate(zip(mats, protos)):
        if Xv.shape[0] != n:
            raise ShapeError(f"view {v} has {Xv.shape[0]} rows, expected {n}")
        if Xv.shape[1] != protos[v].space_dim:
            raise ShapeError(
                f"view {v} dim {Xv.shape[1]} != prototype dim {pv.space_dim}"
            )
        if pv.label_sets != label_sets:
            raise InvalidParameter(f"view {v} prototype label sets disagree")

    clouds = [np.vstack([Xv, pv.vectors]) for Xv, pv in zip(mats, protos)]
    n_views = len(clouds)

    graphs: list[Hypergraph] = []
    for v in range(n_views):
        graphs.append(hypergraph_homogeneous(clouds[v], k, sigma))
    for q in range(n_views):
        for r in range(n_views):
            if q != r:
                graphs.append(hypergraph_heterogeneous(clouds[q], clouds[r], k, sigma))

    operators = [propagation_operator(g) for g in graphs]
    names = [_class_name(labels) for labels in label_sets]
    seeds = seed_matrix(n, len(names))
    combined = bma_combine(
        operators, seeds, alpha=alpha, tol=tol, max_iter=max_iter,
        class_names=names, return_weights=return_weights,
    )
    if return_weights:
        combined, weights = combined
    result = LabelScores(
        F=combined.F[:n],
        class_names=combined.class_names,
        converged=combined.converged,
        n_iter=combined.n_iter,
    )
    if return_weights:
        return result, weights
    return result


def write_scores_csv(scores: LabelScores, path) -> None:
    """CSV with a class-name header row."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(scores.class_names) + "\n")
        for row in scores.F:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
