import math

import numpy as np
from scipy.stats import rankdata

from listenmap.records import DataError


def _check(labels, scores):
    labels = np.asarray(labels, dtype=float).ravel()
    scores = np.asarray(scores, dtype=float).ravel()
    if labels.shape != scores.shape:
        raise DataError('%d labels but %d scores' % (labels.size, scores.size))
    if labels.size == 0:
        raise DataError('cannot evaluate an empty test set')
    if not np.all((labels == 0) | (labels == 1)):
        raise DataError('labels must be 0 or 1')
    if not np.all(np.isfinite(scores)):
        raise DataError('scores contain NaN or Inf')
    return labels.astype(int), scores


def _check_both_classes(labels):
    n_pos = int(labels.sum())
    if n_pos == 0 or n_pos == labels.size:
        raise DataError('test labels hold a single class; the metric is undefined')
    return n_pos, labels.size - n_pos


def balanced_accuracy(labels, scores, threshold=0.5):
    """
    Mean of sensitivity and specificity with score >= threshold predicted
    positive.

    :param labels: 0/1 ground truth.
    :type labels: array_like

    :param scores: Scores in [0, 1].
    :type scores: array_like

    :param threshold: Decision threshold.
    :type threshold: float, optional
    """
    labels, scores = _check(labels, scores)
    n_pos, n_neg = _check_both_classes(labels)
    predicted = scores >= threshold
    tpr = np.sum(predicted & (labels == 1)) / n_pos
    tnr = np.sum(~predicted & (labels == 0)) / n_neg
    return float((tpr + tnr) / 2)


def top_k_count(n, k_percent):
    "ceil(n * k / 100), at least 1"
    if not 0 < k_percent <= 100:
        raise ValueError('k_percent must lie in (0, 100]')
    return max(1, int(math.ceil(round(n * k_percent / 100.0, 9))))


def precision_at_k(labels, scores, k_percent=5.0):
    """
    Fraction of positives among the top k percent of rows by score.

    Equal scores keep their input order, so the result is deterministic.
    """
    labels, scores = _check(labels, scores)
    m = top_k_count(labels.size, k_percent)
    order = np.argsort(-scores, kind='stable')
    return float(labels[order[:m]].mean())


def auc(labels, scores):
    "Area under the ROC curve, ties counted as one half"
    labels, scores = _check(labels, scores)
    n_pos, n_neg = _check_both_classes(labels)
    ranks = rankdata(scores, method='average')
    u = ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def roc_curve_points(labels, scores):
    """
    ROC curve as (fpr, tpr, thresholds), one point per distinct score from
    the highest down, starting at (0, 0) with an infinite threshold.
    """
    labels, scores = _check(labels, scores)
    n_pos, n_neg = _check_both_classes(labels)
    order = np.argsort(-scores, kind='stable')
    s, y = scores[order], labels[order]
    last = np.r_[np.nonzero(np.diff(s))[0], s.size - 1]
    tps = np.cumsum(y)[last]
    fps = (last + 1) - tps
    fpr = np.r_[0.0, fps / n_neg]
    tpr = np.r_[0.0, tps / n_pos]
    thresholds = np.r_[np.inf, s[last]]
    return fpr, tpr, thresholds


__all__ = ['balanced_accuracy', 'precision_at_k', 'auc', 'roc_curve_points',
           'top_k_count']
