"""Prediction scoring: multi-class accuracy reports and multi-label losses.

Multi-label losses follow the standard rank-based definitions; smaller is
better for every metric.

- hamming_loss: fraction of (instance, label) cells where the thresholded
  prediction disagrees with the truth.
- ranking_loss: fraction of (relevant, irrelevant) label pairs with the
  irrelevant label scored at least as high, averaged over instances.
- one_error: fraction of instances whose top-scored label is irrelevant.
- coverage: average 0-based depth in the score ranking needed to cover all
  relevant labels (normalized variant divides by n_labels - 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, InvalidParameter, ShapeError


@dataclass
class MulticlassReport:
    accuracy: float
    per_class_accuracy: dict[str, float]
    confusion: np.ndarray
    class_names: list[str]
    n_instances: int


@dataclass
class MultilabelReport:
    hamming_loss: float
    ranking_loss: float
    one_error: float
    coverage: float
    coverage_normalized: float
    n_instances: int
    n_labels: int
    threshold_mode: str = "centered"
    notes: list[str] = field(default_factory=list)


def multiclass_accuracy(pred, truth) -> MulticlassReport:
    """Exact-match accuracy with per-class rates and a confusion matrix.

    Confusion rows index the true class, columns the predicted class.
    """
    pred = list(pred)
    truth = list(truth)
    if len(pred) != len(truth):
        raise ShapeError(f"{len(pred)} predictions vs {len(truth)} truths")
    if not truth:
        raise ShapeError("need at least one instance")
    names = sorted(set(truth) | set(pred))
    index = {name: i for i, name in enumerate(names)}
    confusion = np.zeros((len(names), len(names)), dtype=np.int64)
    for p, t in zip(pred, truth):
        confusion[index[t], index[p]] += 1
    correct = int(np.trace(confusion))
    per_class = {}
    for name in names:
        row = confusion[index[name]]
        total = int(row.sum())
        if total > 0:
            per_class[name] = float(row[index[name]]) / total
    return MulticlassReport(
        accuracy=correct / len(truth),
        per_class_accuracy=per_class,
        confusion=confusion,
        class_names=names,
        n_instances=len(truth),
    )


def _truth_mask(truth_sets, labels: list[str]) -> np.ndarray:
    index = {name: i for i, name in enumerate(labels)}
    mask = np.zeros((len(truth_sets), len(labels)), dtype=bool)
    for i, labels_i in enumerate(truth_sets):
        if not labels_i:
            raise InvalidInput(f"instance {i} has an empty truth label set")
        for name in labels_i:
            if name not in index:
                raise InvalidInput(f"truth label {name!r} not in score columns")
            mask[i, index[name]] = True
    return mask


def multilabel_losses(
    scores,
    labels: list[str],
    truth_sets,
    threshold: str = "centered",
) -> MultilabelReport:
    """Compute the four rank-based losses from per-label scores.

    ``threshold`` selects how hamming predictions are made: "centered"
    thresholds each label's column-centered score at zero; "topk" keeps the
    |truth| top-scored labels per instance (leaks truth cardinality, for
    ablation only).
    """
    S = np.asarray(scores, dtype=np.float64)
    if S.ndim != 2:
        raise ShapeError("scores must be 2-D")
    if S.shape[1] != len(labels):
        raise ShapeError(f"{S.shape[1]} score columns vs {len(labels)} labels")
    truth_sets = list(truth_sets)
    if S.shape[0] != len(truth_sets):
        raise ShapeError(f"{S.shape[0]} score rows vs {len(truth_sets)} truth sets")
    if threshold not in ("centered", "topk"):
        raise InvalidParameter(f"unknown threshold mode {threshold!r}")

    n, L = S.shape
    truth = _truth_mask(truth_sets, labels)

    if threshold == "centered":
        predicted = (S - S.mean(axis=0)) > 0.0
    else:
        predicted = np.zeros_like(truth)
        for i in range(n):
            kth = int(truth[i].sum())
            top = np.argsort(-S[i], kind="stable")[:kth]
            predicted[i, top] = True
    hamming = float(np.mean(predicted != truth))

    ranking_terms = []
    one_errors = []
    coverages = []
    for i in range(n):
        relevant = np.flatnonzero(truth[i])
        irrelevant = np.flatnonzero(~truth[i])
        order = np.argsort(-S[i], kind="stable")
        rank = np.empty(L, dtype=np.int64)
        rank[order] = np.arange(L)
        one_errors.append(0.0 if truth[i, order[0]] else 1.0)
        coverages.append(float(rank[relevant].max()))
        if irrelevant.size:
            bad = sum(
                1
                for r in relevant
                for q in irrelevant
                if S[i, q] >= S[i, r]
            )
            ranking_terms.append(bad / (relevant.size * irrelevant.size))

    coverage = float(np.mean(coverages))
    return MultilabelReport(
        hamming_loss=hamming,
        ranking_loss=float(np.mean(ranking_terms)) if ranking_terms else 0.0,
        one_error=float(np.mean(one_errors)),
        coverage=coverage,
        coverage_normalized=coverage / (L - 1) if L > 1 else 0.0,
        n_instances=n,
        n_labels=L,
        threshold_mode=threshold,
        notes=["implemented loss set is a superset of any particular benchmark's"],
    )
