"""Report rendering: human-readable tables, CSV emitters, and figures.

Figures are written as PNG next to the delimited outputs. Metadata is
pinned so identical runs produce byte-identical files.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import MulticlassReport, MultilabelReport

_PNG_META = {"Software": "tmvzsl"}


def _save(fig, path) -> None:
    fig.savefig(path, format="png", dpi=120, metadata=_PNG_META)
    plt.close(fig)


def multiclass_table(report: MulticlassReport, extra: dict | None = None) -> str:
    lines = ["metric,value"]
    lines.append(f"accuracy,{report.accuracy!r}")
    for name in report.class_names:
        if name in report.per_class_accuracy:
            lines.append(f"per_class_accuracy[{name}],{report.per_class_accuracy[name]!r}")
    for key, value in (extra or {}).items():
        lines.append(f"{key},{value!r}")
    return "\n".join(lines) + "\n"


def multiclass_text(report: MulticlassReport, extra: dict | None = None) -> str:
    width = max(len(n) for n in report.class_names)
    lines = [
        f"instances: {report.n_instances}",
        f"accuracy:  {report.accuracy:.4f}",
    ]
    for key, value in (extra or {}).items():
        lines.append(f"{key}: {value:.4f}" if isinstance(value, float) else f"{key}: {value}")
    lines.append("per-class accuracy:")
    for name in report.class_names:
        if name in report.per_class_accuracy:
            lines.append(f"  {name:<{width}}  {report.per_class_accuracy[name]:.4f}")
    return "\n".join(lines) + "\n"


def multilabel_table(report: MultilabelReport) -> str:
    lines = [
        "metric,value",
        f"hamming_loss,{report.hamming_loss!r}",
        f"ranking_loss,{report.ranking_loss!r}",
        f"one_error,{report.one_error!r}",
        f"coverage,{report.coverage!r}",
        f"coverage_normalized,{report.coverage_normalized!r}",
    ]
    return "\n".join(lines) + "\n"


def multilabel_text(report: MultilabelReport) -> str:
    lines = [
        f"instances: {report.n_instances}   labels: {report.n_labels}",
        f"hamming loss:        {report.hamming_loss:.4f}",
        f"ranking loss:        {report.ranking_loss:.4f}",
        f"one-error:           {report.one_error:.4f}",
        f"coverage:            {report.coverage:.4f}",
        f"coverage normalized: {report.coverage_normalized:.4f}",
        f"(hamming threshold mode: {report.threshold_mode}; smaller is better)",
    ]
    for note in report.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"


def confusion_figure(report: MulticlassReport, path) -> None:
    fig, ax = plt.subplots(figsize=(5.2, 4.6))
    counts = report.confusion
    im = ax.imshow(counts, cmap="Blues")
    ax.set_xticks(range(len(report.class_names)))
    ax.set_yticks(range(len(report.class_names)))
    ax.set_xticklabels(report.class_names, rotation=45, ha="right", fontsize=7)
    ax.set_yticklabels(report.class_names, fontsize=7)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    ax.set_title(f"confusion (accuracy {report.accuracy:.3f})")
    threshold = counts.max() / 2 if counts.max() else 0.5
    for i in range(counts.shape[0]):
        for j in range(counts.shape[1]):
            if counts[i, j]:
                color = "white" if counts[i, j] > threshold else "black"
                ax.text(j, i, str(counts[i, j]), ha="center", va="center",
                        color=color, fontsize=7)
    fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    _save(fig, path)


def per_class_accuracy_figure(report: MulticlassReport, path) -> None:
    names = [n for n in report.class_names if n in report.per_class_accuracy]
    values = [report.per_class_accuracy[n] for n in names]
    fig, ax = plt.subplots(figsize=(5.6, 3.4))
    ax.bar(range(len(names)), values, color="#4878d0")
    ax.axhline(report.accuracy, color="#d65f5f", linewidth=1,
               label=f"overall {report.accuracy:.3f}")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=45, ha="right", fontsize=7)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("accuracy")
    ax.legend(fontsize=7)
    fig.tight_layout()
    _save(fig, path)


def multilabel_loss_figure(report: MultilabelReport, path) -> None:
    names = ["hamming", "ranking", "one-error", "coverage (norm)"]
    values = [
        report.hamming_loss,
        report.ranking_loss,
        report.one_error,
        report.coverage_normalized,
    ]
    fig, ax = plt.subplots(figsize=(4.8, 3.2))
    ax.bar(range(len(names)), values, color="#6acc64")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, fontsize=8)
    ax.set_ylabel("loss (smaller is better)")
    ax.set_ylim(0, max(1.0, max(values) * 1.1))
    for x, v in enumerate(values):
        ax.text(x, v, f"{v:.3f}", ha="center", va="bottom", fontsize=7)
    fig.tight_layout()
    _save(fig, path)


def score_heatmap_figure(F: np.ndarray, class_names, path, max_rows: int = 200) -> None:
    shown = np.asarray(F)[:max_rows]
    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    im = ax.imshow(shown, aspect="auto", cmap="viridis", interpolation="nearest")
    ax.set_xticks(range(len(class_names)))
    ax.set_xticklabels(class_names, rotation=45, ha="right", fontsize=6)
    ax.set_ylabel(f"instance (first {shown.shape[0]})")
    ax.set_title("propagated scores")
    fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    _save(fig, path)


def write_text(content: str, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(content)


def ensure_dir(path) -> None:
    os.makedirs(path, exist_ok=True)
