import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fedclus.errors import EmptyInput, LengthMismatch, SingleClassInput
from fedclus.metrics import (
    ConfusionMatrix,
    auc,
    classification_metrics,
    confusion_matrix,
    ks_statistic,
    roc_curve,
)

WORKED_SCORES = [0.9, 0.4, 0.35, 0.8]
WORKED_LABELS = [1, 0, 1, 0]


def pairwise_auc(scores, labels):
    """P(score_pos > score_neg) + 0.5 * P(tie), by enumerating every pair."""
    s = np.asarray(scores, float)
    y = np.asarray(labels)
    pos, neg = s[y == 1], s[y == 0]
    wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
    return wins / (len(pos) * len(neg))


def brute_ks(scores, labels):
    s = np.asarray(scores, float)
    y = np.asarray(labels)
    best = 0.0
    for t in np.unique(s):
        pred = s >= t
        tpr = (pred & (y == 1)).sum() / (y == 1).sum()
        fpr = (pred & (y == 0)).sum() / (y == 0).sum()
        best = max(best, tpr - fpr)
    return best


def test_confusion_examples():
    assert confusion_matrix([0.9, 0.1], [1, 0], 0.5) == ConfusionMatrix(1, 0, 0, 1)
    assert confusion_matrix([0.5], [1], 0.5) == ConfusionMatrix(1, 0, 0, 0)
    scores = [0.9, 0.6, 0.4, 0.3, 0.2, 0.8, 0.7, 0.1, 0.05, 0.15]
    labels = [1, 1, 1, 0, 0, 0, 1, 0, 0, 0]
    assert confusion_matrix(scores, labels, 0.5) == ConfusionMatrix(tp=3, fp=1, fn=1, tn=5)


def test_confusion_errors():
    with pytest.raises(LengthMismatch):
        confusion_matrix([0.1, 0.2], [1], 0.5)
    with pytest.raises(EmptyInput):
        confusion_matrix([], [], 0.5)


def test_classification_metrics_examples():
    m = classification_metrics(ConfusionMatrix(tp=2, fp=1, fn=1, tn=6))
    assert m.accuracy == pytest.approx(0.8)
    assert m.precision == pytest.approx(2 / 3)
    assert m.recall == pytest.approx(2 / 3)
    assert m.f1 == pytest.approx(2 / 3)
    perfect = classification_metrics(ConfusionMatrix(5, 0, 0, 5))
    assert (perfect.accuracy, perfect.precision, perfect.recall, perfect.f1) == (1.0, 1.0, 1.0, 1.0)
    none = classification_metrics(ConfusionMatrix(0, 0, 3, 7))
    assert (none.precision, none.recall, none.f1) == (0.0, 0.0, 0.0)
    assert none.degenerate


@settings(max_examples=200, deadline=None)
@given(st.tuples(*[st.integers(0, 50)] * 4).filter(lambda t: t[0] > 0 and sum(t) > 0))
def test_f1_forms_agree(t):
    m = classification_metrics(ConfusionMatrix(*t))
    assert m.f1 == pytest.approx(2 * m.precision * m.recall / (m.precision + m.recall))
    assert m.accuracy == (t[0] + t[3]) / sum(t)


def test_worked_roc_example():
    curve = roc_curve(WORKED_SCORES, WORKED_LABELS)
    assert curve.points() == [(0, 0), (0, 0.5), (0.5, 0.5), (1, 0.5), (1, 1)]
    assert auc(curve) == 0.5 == pairwise_auc(WORKED_SCORES, WORKED_LABELS)
    assert ks_statistic(curve) == 0.5


def test_roc_degenerate_cases():
    curve = roc_curve([0.3, 0.3, 0.3, 0.3], [1, 0, 1, 0])
    assert curve.points() == [(0, 0), (1, 1)]
    assert auc(curve) == 0.5
    assert ks_statistic(curve) == 0.0
    sep = roc_curve([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])
    assert (0.0, 1.0) in sep.points()
    assert auc(sep) == 1.0 and ks_statistic(sep) == 1.0
    with pytest.raises(SingleClassInput):
        roc_curve([0.1, 0.2], [1, 1])


@st.composite
def scored(draw):
    n = draw(st.integers(2, 120))
    labels = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n).filter(lambda l: 0 < sum(l) < len(l)))
    # coarse grid so ties are common
    scores = draw(st.lists(st.integers(0, 20), min_size=n, max_size=n))
    return [s / 20 for s in scores], labels


@settings(max_examples=200, deadline=None)
@given(scored())
def test_auc_and_ks_match_brute_force(data):
    scores, labels = data
    curve = roc_curve(scores, labels)
    assert abs(auc(curve) - pairwise_auc(scores, labels)) <= 1e-9
    assert ks_statistic(curve) == brute_ks(scores, labels)
    assert np.all(np.diff(curve.fpr) >= 0) and np.all(np.diff(curve.tpr) >= 0)
    assert curve.points()[0] == (0, 0) and curve.points()[-1] == (1, 1)


@settings(max_examples=100, deadline=None)
@given(scored())
def test_monotone_transform_invariance(data):
    scores, labels = data
    a = roc_curve(scores, labels)
    b = roc_curve(np.exp(3 * np.asarray(scores)) - 7, labels)
    assert a.points() == b.points()
    assert auc(a) == auc(b) and ks_statistic(a) == ks_statistic(b)
