"""Confusion matrices and the precision/recall/F1 report derived from them.

Per-class scores use the usual definitions (precision = TP/(TP+FP),
recall = TP/(TP+FN), F1 = harmonic mean); zero-division yields 0 and the
class is flagged. Macro scores are unweighted means over all classes,
weighted scores are support-weighted means where support is the true-class
count. Conflict TP/FP counts are tracked separately because the filtering
experiments account for them directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import CONFLICT
from .errors import UnknownLabelError, ValidationError


@dataclass(frozen=True)
class ConfusionMatrix:
    """Square count matrix; rows are true classes, columns predicted."""

    classes: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        n = len(self.classes)
        if self.counts.shape != (n, n):
            raise ValidationError(
                f"confusion counts must be {n}x{n}, got {self.counts.shape}")
        if (self.counts < 0).any():
            raise ValidationError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def add(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.classes != self.classes:
            raise ValidationError("cannot add confusion matrices over different classes")
        return ConfusionMatrix(self.classes, self.counts + other.counts)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    per_class: dict[str, ClassMetrics]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    conflict_tp: int
    conflict_fp: int
    zero_division_classes: tuple[str, ...] = field(default=())

    def value(self, name: str) -> float:
        """Look up a metric by report key, e.g. "macro_f1" or "conflict_recall"."""
        direct = {
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "weighted_precision": self.weighted_precision,
            "weighted_recall": self.weighted_recall,
            "weighted_f1": self.weighted_f1,
            "conflict_tp": float(self.conflict_tp),
            "conflict_fp": float(self.conflict_fp),
        }
        if name in direct:
            return direct[name]
        cls, _, metric = name.rpartition("_")
        if cls in self.per_class and metric in ("precision", "recall", "f1"):
            return getattr(self.per_class[cls], metric)
        raise KeyError(f"unknown metric {name!r}")


def confusion(true_labels, predicted_labels, classes) -> ConfusionMatrix:
    """Count matrix over aligned label sequences."""
    classes = tuple(classes)
    if len(true_labels) != len(predicted_labels):
        raise ValidationError("true and predicted label sequences differ in length")
    index = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(true_labels, predicted_labels):
        if t not in index:
            raise UnknownLabelError(f"true label {t!r} not in classes {classes}")
        if p not in index:
            raise UnknownLabelError(f"predicted label {p!r} not in classes {classes}")
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(classes=classes, counts=counts)


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Full score report from a confusion matrix (errors on an empty one)."""
    total = cm.total
    if total == 0:
        raise ValidationError("cannot compute metrics of an empty confusion matrix")
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    fp = counts.sum(axis=0) - tp
    fn = counts.sum(axis=1) - tp
    support = counts.sum(axis=1)

    flagged: list[str] = []
    per_class: dict[str, ClassMetrics] = {}
    precisions = np.zeros(len(cm.classes))
    recalls = np.zeros(len(cm.classes))
    f1s = np.zeros(len(cm.classes))
    for i, cls in enumerate(cm.classes):
        denom_p = tp[i] + fp[i]
        denom_r = tp[i] + fn[i]
        zero_division = denom_p == 0 or denom_r == 0
        precision = tp[i] / denom_p if denom_p > 0 else 0.0
        recall = tp[i] / denom_r if denom_r > 0 else 0.0
        if precision + recall > 0:
            f1 = 2.0 * precision * recall / (precision + recall)
        else:
            f1 = 0.0
            zero_division = True
        if zero_division:
            flagged.append(cls)
        precisions[i], recalls[i], f1s[i] = precision, recall, f1
        per_class[cls] = ClassMetrics(precision=float(precision), recall=float(recall),
                                      f1=float(f1), support=int(support[i]))

    weights = support / total
    conflict_idx = cm.classes.index(CONFLICT) if CONFLICT in cm.classes else None
    return MetricsReport(
        accuracy=float(tp.sum() / total),
        per_class=per_class,
        macro_precision=float(precisions.mean()),
        macro_recall=float(recalls.mean()),
        macro_f1=float(f1s.mean()),
        weighted_precision=float(precisions @ weights),
        weighted_recall=float(recalls @ weights),
        weighted_f1=float(f1s @ weights),
        conflict_tp=int(tp[conflict_idx]) if conflict_idx is not None else 0,
        conflict_fp=int(fp[conflict_idx]) if conflict_idx is not None else 0,
        zero_division_classes=tuple(flagged),
    )


__all__ = ["ConfusionMatrix", "ClassMetrics", "MetricsReport", "confusion", "metrics"]
