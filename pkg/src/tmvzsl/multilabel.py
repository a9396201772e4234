"""Multi-label zero-shot prediction in word-vector space.

Label combinations are synthesized as prototypes by summing or averaging
member word vectors; prediction is nearest-prototype (DMP) or propagation
over test points plus prototypes (TraMP), optionally preceded by
self-training adaptation of the projection.
"""

from __future__ import annotations

import itertools
import math
import warnings as _warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dataset import LabelVocabulary, PrototypeSet, WordVectorTable, as_array
from .errors import (
    InvalidParameter,
    MissingVectorError,
    ShapeError,
    SizeLimitError,
)
from .projection import ProjectionModel, apply as project
from .propagation import (
    DEFAULT_ALPHA,
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    LabelScores,
    propagate,
    seed_matrix,
)
from .graph import knn_graph, propagation_operator

DEFAULT_SUBSET_CAP = 10**6


@dataclass
class LabelPowerSet:
    """All nonempty label subsets up to a cardinality cap, in canonical
    order: by cardinality, then lexicographic by label strings."""

    vocabulary: LabelVocabulary
    max_cardinality: int
    subsets: list[tuple[str, ...]]


def subset_count(n_labels: int, max_cardinality: int) -> int:
    return sum(math.comb(n_labels, c) for c in range(1, max_cardinality + 1))


def enumerate_subsets(
    vocab: LabelVocabulary,
    max_cardinality: int | None = None,
    cap: int = DEFAULT_SUBSET_CAP,
) -> LabelPowerSet:
    n = len(vocab)
    if max_cardinality is None or max_cardinality == 0:
        max_cardinality = min(n, 4)
    if not 1 <= max_cardinality <= n:
        raise InvalidParameter(
            f"max_cardinality={max_cardinality} outside [1, {n}]"
        )
    total = subset_count(n, max_cardinality)
    if total > cap:
        raise SizeLimitError(f"{total} subsets exceeds cap {cap}")
    names = sorted(vocab.names)
    subsets = []
    for card in range(1, max_cardinality + 1):
        subsets.extend(itertools.combinations(names, card))
    return LabelPowerSet(vocabulary=vocab, max_cardinality=max_cardinality,
                         subsets=subsets)


def synth_prototype(labels, wv: WordVectorTable, mode: str = "mean") -> np.ndarray:
    """Synthesize a label-set prototype as the sum or mean of member vectors."""
    if mode not in ("sum", "mean"):
        raise InvalidParameter(f"unknown synthesis mode {mode!r}")
    ordered = sorted(labels)
    if not ordered:
        raise InvalidParameter("label set is empty")
    for name in ordered:
        if name not in wv:
            raise MissingVectorError(f"no word vector for label {name!r}")
    total = np.zeros(wv.dim)
    for name in ordered:
        total = total + wv.vector(name)
    if mode == "mean":
        total = total / len(ordered)
    return total


def power_set_prototypes(
    vocab: LabelVocabulary,
    wv: WordVectorTable,
    max_cardinality: int | None = None,
    mode: str = "mean",
    cap: int = DEFAULT_SUBSET_CAP,
) -> PrototypeSet:
    """One synthesized prototype per nonempty label subset, canonical order."""
    power = enumerate_subsets(vocab, max_cardinality, cap=cap)
    items = [(subset, synth_prototype(subset, wv, mode)) for subset in power.subsets]
    return PrototypeSet(space_dim=wv.dim, items=items)


def _distances(X: np.ndarray, P: np.ndarray, metric: str) -> np.ndarray:
    if metric == "euclidean":
        aa = np.sum(X * X, axis=1)[:, None]
        bb = np.sum(P * P, axis=1)[None, :]
        sq = aa + bb - 2.0 * (X @ P.T)
        np.maximum(sq, 0.0, out=sq)
        return np.sqrt(sq)
    if metric == "cosine":
        xn = np.linalg.norm(X, axis=1, keepdims=True)
        pn = np.linalg.norm(P, axis=1, keepdims=True)
        xs = np.where(xn > 0.0, xn, 1.0)
        ps = np.where(pn > 0.0, pn, 1.0)
        cos = (X / xs) @ (P / ps).T
        return 1.0 - cos
    raise InvalidParameter(f"unknown metric {metric!r}")


def prototype_scores(X, protos: PrototypeSet, metric: str = "cosine") -> np.ndarray:
    """Similarity of every row to every prototype (negated distance)."""
    Xa = as_array(X)
    if Xa.shape[1] != protos.space_dim:
        raise ShapeError(
            f"X has {Xa.shape[1]} columns, prototypes have {protos.space_dim}"
        )
    return -_distances(Xa, protos.vectors, metric)


def dmp_predict(
    X,
    protos: PrototypeSet,
    metric: str = "cosine",
    return_distances: bool = False,
):
    """Assign each row the label set of its nearest prototype.

    Distance ties resolve to the earlier prototype.
    """
    Xa = as_array(X)
    if len(protos) == 0:
        raise InvalidParameter("prototype set is empty")
    if Xa.shape[1] != protos.space_dim:
        raise ShapeError(
            f"X has {Xa.shape[1]} columns, prototypes have {protos.space_dim}"
        )
    D = _distances(Xa, protos.vectors, metric)
    idx = np.argmin(D, axis=1)  # argmin returns the first minimum
    preds = [protos.label_sets[int(i)] for i in idx]
    if return_distances:
        return preds, D[np.arange(len(idx)), idx]
    return preds


def tramp_predict(
    X,
    protos: PrototypeSet,
    k: int = 10,
    alpha: float = DEFAULT_ALPHA,
    *,
    sigma="auto",
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    return_scores: bool = False,
):
    """Transductive prediction: propagate subset labels over a kNN graph of
    the test rows plus the synthesized prototypes, one class per subset."""
    Xa = as_array(X)
    if Xa.shape[1] != protos.space_dim:
        raise ShapeError(
            f"X has {Xa.shape[1]} columns, prototypes have {protos.space_dim}"
        )
    n = Xa.shape[0]
    cloud = np.vstack([Xa, protos.vectors])
    g = knn_graph(cloud, k, sigma)
    op = propagation_operator(g)
    names = ["|".join(labels) for labels in protos.label_sets]
    scores = propagate(op, seed_matrix(n, len(protos)), alpha=alpha, tol=tol,
                       max_iter=max_iter, class_names=names)
    data_scores = LabelScores(
        F=scores.F[:n],
        class_names=scores.class_names,
        converged=scores.converged,
        n_iter=scores.n_iter,
    )
    preds = [protos.label_sets[int(np.argmax(row))] for row in data_scores.F]
    if return_scores:
        return preds, data_scores
    return preds


def label_scores_from_subsets(
    subset_scores: np.ndarray,
    label_sets: list[tuple[str, ...]],
    labels: list[str],
) -> np.ndarray:
    """Per-label score = max score over the subsets containing the label."""
    n = subset_scores.shape[0]
    out = np.full((n, len(labels)), -np.inf)
    for s, subset in enumerate(label_sets):
        for name in subset:
            col = labels.index(name)
            out[:, col] = np.maximum(out[:, col], subset_scores[:, s])
    return out


def self_train_adapt(
    model: ProjectionModel,
    X_target,
    protos: PrototypeSet,
    rounds: int = 3,
    keep_fraction: float = 0.5,
    *,
    metric: str = "cosine",
    aug_weight: float = 1.0,
    keep_rule: str = "per_class",
) -> ProjectionModel:
    """Adapt the projection to the target set by confidence-filtered
    pseudo-label refits.

    Each round projects the target features, assigns nearest prototypes,
    keeps the most confident fraction, and resolves

        min_W ||A W - T||^2 + aug_weight * n_kept * ||W - W_prev||^2

    where A holds the kept normalized features (plus a ones column) and T
    the assigned prototype vectors. The anchor term scales with the kept-row
    count so the previous model keeps pace with the data term. With the
    default "per_class" keep rule the fraction is taken within each
    predicted class, which stops a single dominant prototype from absorbing
    the whole refit. rounds=0 returns the model unchanged.
    """
    if rounds < 0:
        raise InvalidParameter(f"rounds must be >= 0, got {rounds}")
    if not 0.0 < keep_fraction <= 1.0:
        raise InvalidParameter(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    if aug_weight <= 0:
        raise InvalidParameter(f"aug_weight must be > 0, got {aug_weight}")
    if keep_rule not in ("per_class", "global"):
        raise InvalidParameter(f"unknown keep rule {keep_rule!r}")
    if rounds == 0:
        return model

    Xa = as_array(X_target)
    n = Xa.shape[0]
    if n == 0:
        _warnings.warn("empty target set; self-training skipped")
        return model

    current = model
    for _ in range(rounds):
        projected = project(current, Xa).data
        preds, dists = dmp_predict(projected, protos, metric=metric,
                                   return_distances=True)
        pred_idx = np.array([protos.label_sets.index(p) for p in preds])
        if keep_rule == "per_class":
            kept: list[int] = []
            for c in range(len(protos)):
                rows = np.flatnonzero(pred_idx == c)
                if rows.size == 0:
                    continue
                kc = max(1, int(math.floor(keep_fraction * rows.size)))
                kept.extend(rows[np.argsort(dists[rows], kind="stable")[:kc]])
            order = np.array(sorted(kept))
        else:
            keep = max(1, int(math.floor(keep_fraction * n)))
            order = np.argsort(dists, kind="stable")[:keep]
        Xn = (Xa[order] - current.input_mean) / current.input_scale
        T = np.vstack([protos.vectors[pred_idx[i]] for i in order])
        theta_prev = np.vstack([current.weights, current.bias])
        A = np.hstack([Xn, np.ones((len(order), 1))])
        sqrt_aug = math.sqrt(aug_weight * len(order))
        A_aug = np.vstack([A, sqrt_aug * np.eye(A.shape[1])])
        T_aug = np.vstack([T, sqrt_aug * theta_prev])
        theta, _, _, _ = scipy.linalg.lstsq(A_aug, T_aug, lapack_driver="gelsd")
        current = ProjectionModel(
            weights=theta[:-1],
            bias=theta[-1],
            input_mean=current.input_mean,
            input_scale=current.input_scale,
            lam=current.lam,
            normalize=current.normalize,
        )
    return current
