"""Imbalance-aware evaluation: confusion matrix, G-Mean, AUC and Hand-Till Avg-AUC."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata


class UndefinedMetric(ValueError):
    pass


def confusion_matrix(y_true, y_pred, n_classes):
    """Rows are true classes, columns predicted classes."""
    cm = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(cm, (np.asarray(y_true, int), np.asarray(y_pred, int)), 1)
    return cm


def class_recalls(cm):
    cm = np.asarray(cm, dtype=float)
    support = cm.sum(axis=1)
    return np.divide(np.diag(cm), support, out=np.zeros(len(cm)), where=support > 0)


def g_mean(recalls):
    """Geometric mean of per-class recalls; zero if any class is never recovered."""
    r = np.asarray(recalls, dtype=float)
    if np.any(r <= 0):
        return 0.0
    return float(np.exp(np.mean(np.log(r))))


def auc_binary(scores, labels, positive=1):
    """Mann-Whitney estimate of P(score_pos > score_neg), ties counted one half."""
    scores = np.asarray(scores, dtype=float)
    pos = np.asarray(labels) == positive
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetric("AUC needs both positive and negative instances")
    ranks = rankdata(scores)  # average ranks handle ties
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2
    return float(u / (n_pos * n_neg))


def avg_auc(score_matrix, labels, n_classes=None):
    """Hand-Till multi-class AUC: mean over class pairs of the symmetrised pairwise AUC."""
    S = np.asarray(score_matrix, dtype=float)
    labels = np.asarray(labels, dtype=int)
    C = S.shape[1] if n_classes is None else n_classes
    present = np.bincount(labels, minlength=C)
    if np.any(present == 0):
        raise UndefinedMetric(f"classes {np.flatnonzero(present == 0).tolist()} absent")
    total = 0.0
    pairs = list(itertools.combinations(range(C), 2))
    for i, j in pairs:
        keep = (labels == i) | (labels == j)
        a_ij = auc_binary(S[keep, i], labels[keep], positive=i)
        a_ji = auc_binary(S[keep, j], labels[keep], positive=j)
        total += 0.5 * (a_ij + a_ji)
    return total / len(pairs)


@dataclass
class EvaluationReport:
    confusion: np.ndarray
    recalls: np.ndarray
    g_mean: float
    accuracy: float
    n_test: int
    auc: float = None
    avg_auc: float = None
    warnings: list = field(default_factory=list)

    def to_dict(self):
        d = {"confusion": self.confusion.tolist(), "recalls": self.recalls.tolist(),
             "g_mean": self.g_mean, "accuracy": self.accuracy, "n_test": self.n_test}
        if self.auc is not None:
            d["auc"] = self.auc
        if self.avg_auc is not None:
            d["avg_auc"] = self.avg_auc
        if self.warnings:
            d["warnings"] = list(self.warnings)
        return d


def evaluate(ensemble, ds):
    """Score ``ensemble`` on ``ds``; AUC metrics are skipped (with a warning) when a class is absent."""
    S = ensemble.scores(ds.X)
    pred = np.argmax(S, axis=1)
    C = ensemble.n_classes
    cm = confusion_matrix(ds.y, pred, C)
    rec = class_recalls(cm)
    present = cm.sum(axis=1) > 0
    report = EvaluationReport(cm, rec, g_mean(rec[present]) if present.any() else 0.0,
                              float(np.trace(cm) / max(ds.n, 1)), int(ds.n))
    if not present.all():
        report.warnings.append(f"classes {np.flatnonzero(~present).tolist()} absent from "
                               "test data; g_mean uses present classes, AUC metrics omitted")
        return report
    if C == 2:
        report.auc = auc_binary(S[:, 1] - S[:, 0], ds.y)
    report.avg_auc = avg_auc(S, ds.y, C)
    return report
