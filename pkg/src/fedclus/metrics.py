"""Binary classification metrics: confusion matrix, F1 family, ROC, AUC, KS."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, LengthMismatch, SingleClassInput


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class ClassificationMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    # set when a zero denominator forced the 0 convention
    degenerate: bool = False


def _check(scores, labels):
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel()
    if len(s) != len(y):
        raise LengthMismatch(f"{len(s)} scores vs {len(y)} labels")
    if len(s) == 0:
        raise EmptyInput("no scores to evaluate")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    return s, y.astype(np.int64)


def confusion_matrix(scores, labels, threshold: float = 0.5) -> ConfusionMatrix:
    """Tally outcomes; a score equal to the threshold counts as positive."""
    s, y = _check(scores, labels)
    pred = s >= threshold
    pos = y == 1
    return ConfusionMatrix(
        tp=int(np.sum(pred & pos)),
        fp=int(np.sum(pred & ~pos)),
        fn=int(np.sum(~pred & pos)),
        tn=int(np.sum(~pred & ~pos)),
    )


def classification_metrics(cm: ConfusionMatrix) -> ClassificationMetrics:
    if cm.total < 1:
        raise EmptyInput("confusion matrix is empty")
    accuracy = (cm.tp + cm.tn) / cm.total
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else 0.0
    recall = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else 0.0
    f1_den = 2 * cm.tp + cm.fp + cm.fn
    f1 = 2 * cm.tp / f1_den if f1_den else 0.0
    degenerate = not (cm.tp + cm.fp and cm.tp + cm.fn and f1_den)
    return ClassificationMetrics(accuracy, precision, recall, f1, degenerate)


@dataclass(frozen=True, eq=False)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    # threshold for each point; +inf at the (0, 0) start, -inf for an appended (1, 1)
    thresholds: np.ndarray

    def points(self) -> list[tuple[float, float]]:
        return [(float(a), float(b)) for a, b in zip(self.fpr, self.tpr)]

    def __len__(self):
        return len(self.fpr)


def roc_curve(scores, labels) -> RocCurve:
    """One point per distinct score, swept from the highest score downward."""
    s, y = _check(scores, labels)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassInput("ROC needs both classes")
    order = np.argsort(-s, kind="mergesort")
    s_sorted = s[order]
    y_sorted = y[order]
    tps = np.cumsum(y_sorted)
    fps = np.cumsum(1 - y_sorted)
    # last row of each run of tied scores
    last = np.r_[np.flatnonzero(np.diff(s_sorted) != 0), len(s_sorted) - 1]
    fpr = np.r_[0.0, fps[last] / n_neg]
    tpr = np.r_[0.0, tps[last] / n_pos]
    thr = np.r_[np.inf, s_sorted[last]]
    if fpr[-1] != 1.0 or tpr[-1] != 1.0:
        fpr, tpr, thr = np.r_[fpr, 1.0], np.r_[tpr, 1.0], np.r_[thr, -np.inf]
    return RocCurve(fpr, tpr, thr)


def auc(curve: RocCurve) -> float:
    """Trapezoidal area under the ROC polyline."""
    return float(np.sum(np.diff(curve.fpr) * (curve.tpr[1:] + curve.tpr[:-1]) / 2.0))


def ks_statistic(curve: RocCurve) -> float:
    return float(np.max(curve.tpr - curve.fpr))


def ks_point(curve: RocCurve) -> tuple[float, float, float]:
    """(fpr, tpr, threshold) at the first point attaining the KS maximum."""
    i = int(np.argmax(curve.tpr - curve.fpr))
    return float(curve.fpr[i]), float(curve.tpr[i]), float(curve.thresholds[i])
