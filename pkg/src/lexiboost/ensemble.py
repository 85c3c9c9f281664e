"""Margins, hinge loss, AdaBoost component generators and weighted-vote ensembles."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .weak import crisp_vectors, hypothesis_from_dict, uniform_weights, weighted_error

ALPHA_CAP = math.log(1e6) / 2
MODEL_FORMAT = "lexiboost-model/1"


@dataclass
class MarginMatrix:
    """``m[i, t]``: agreement of component ``t`` with the label of instance ``i``.

    For two classes this is ``y_i * f_t(x_i)`` with ``y_i`` in {-1, +1}. With more
    classes it is ``y_i . f_t(x_i) / n_classes`` (label and prediction vectors
    in {-1, +1}^C), so a correct crisp vote scores exactly +1.
    """

    m: np.ndarray
    y: np.ndarray
    n_classes: int

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=float)
        if self.m.ndim == 1:
            self.m = self.m[:, None]
        self.y = np.asarray(self.y, dtype=int)

    @property
    def n(self):
        return self.m.shape[0]

    @property
    def n_components(self):
        return self.m.shape[1]

    @property
    def class_indices(self):
        return [np.flatnonzero(self.y == j) for j in range(self.n_classes)]

    @property
    def class_counts(self):
        return np.bincount(self.y, minlength=self.n_classes)

    def columns(self, t):
        return MarginMatrix(self.m[:, :t], self.y, self.n_classes)


def margin_matrix(components, ds, training=True, normalize=True):
    """Margin matrix of ``components`` on ``ds``.

    ``training`` evaluates k-NN components leave-one-out. ``normalize=False``
    keeps the raw multi-class agreement ``y . f`` (range [-C, C]); it has no
    effect for two classes.
    """
    if not components:
        raise ValueError("need at least one component")
    Y = crisp_vectors(ds.y, ds.n_classes)
    cols = []
    for h in components:
        if h.dim != ds.dim:
            raise ValueError(f"component expects {h.dim} features, dataset has {ds.dim}")
        P = h.predict(ds.X, np.arange(ds.n) if training else None)
        agree = (Y * P).sum(axis=1)
        if ds.n_classes == 2 or normalize:
            agree = agree / ds.n_classes
        cols.append(agree)
    return MarginMatrix(np.column_stack(cols), ds.y, ds.n_classes)


def margins(alpha, mm):
    """Ensemble margin of every instance: ``mm.m @ alpha``."""
    m = mm.m if isinstance(mm, MarginMatrix) else np.asarray(mm, dtype=float)
    return m @ np.asarray(alpha, dtype=float)


def hinge_loss(rho):
    """0 when the margin reaches 1, else the shortfall ``1 - rho``."""
    return np.maximum(0.0, 1.0 - np.asarray(rho, dtype=float))


def class_average_losses(alpha, mm):
    loss = hinge_loss(margins(alpha, mm))
    return np.array([loss[idx].mean() for idx in mm.class_indices])


@dataclass
class Ensemble:
    components: list
    alpha: np.ndarray
    n_classes: int
    label_names: tuple = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float)
        if len(self.components) != self.alpha.size:
            raise ValueError("one weight per component required")
        if np.any(self.alpha < -1e-12):
            raise ValueError("component weights must be non-negative")

    def scores(self, X):
        """Weighted vote per class: ``s_j = sum_t alpha_t f_{t,j}(x)``."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        s = np.zeros((X.shape[0], self.n_classes))
        for a, h in zip(self.alpha, self.components):
            if a != 0:
                s += a * h.predict(X)
        return s

    def predict(self, X):
        """Arg-max class of the weighted vote; ties go to the lower class index."""
        return np.argmax(self.scores(X), axis=1)

    def binary_score(self, X):
        s = self.scores(X)
        return s[:, 1] - s[:, 0]

    def to_dict(self):
        return {"format": MODEL_FORMAT, "class_count": self.n_classes,
                "label_names": list(self.label_names) if self.label_names else None,
                "alpha": [float(a) for a in self.alpha],
                "components": [h.to_dict() for h in self.components]}

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != MODEL_FORMAT:
            raise ValueError(f"unsupported model format {d.get('format')!r}")
        names = tuple(d["label_names"]) if d.get("label_names") else None
        return cls([hypothesis_from_dict(c) for c in d["components"]], d["alpha"],
                   d["class_count"], names)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def simplex_normalize(alpha):
    alpha = np.clip(np.asarray(alpha, dtype=float), 0.0, None)
    total = alpha.sum()
    if total <= 0:
        return np.full(alpha.size, 1.0 / alpha.size)
    return alpha / total


@dataclass
class BoostRun:
    components: list
    alpha: np.ndarray
    errors: list


def run_adaboost(ds, learner, T):
    """Classical two-class AdaBoost.

    Stops early when a round reaches weighted error 0.5 (that component is
    dropped) or 0 (that component is kept with weight ``ALPHA_CAP``). If even
    the first round fails, its component is returned alone with a warning.
    """
    if ds.n_classes != 2:
        raise ValueError("run_adaboost is two-class; use run_adaboost_multiclass")
    if T < 1:
        raise ValueError("T must be at least 1")
    D = uniform_weights(ds.n)
    comps, alphas, errors = [], [], []
    for _ in range(T):
        h = learner.train(ds, D)
        eps = weighted_error(h, ds, D)
        if eps >= 0.5:
            if not comps:
                warnings.warn(f"first weak learner has error {eps:.3f}; "
                              "keeping it as a single component")
                comps.append(h); alphas.append(1.0); errors.append(eps)
            break
        alpha = ALPHA_CAP if eps <= 0 else min(0.5 * math.log((1 - eps) / eps), ALPHA_CAP)
        comps.append(h); alphas.append(alpha); errors.append(eps)
        if eps <= 0:
            break
        agree = np.where(h.predict_train(ds) == ds.y, 1.0, -1.0)
        D = D * np.exp(-alpha * agree)
        D /= D.sum()
    return BoostRun(comps, np.array(alphas), errors)


def run_adaboost_multiclass(ds, learner, T):
    """SAMME-style multi-class boosting: ``alpha = ln((1-eps)/eps) + ln(C-1)``."""
    if T < 1:
        raise ValueError("T must be at least 1")
    C = ds.n_classes
    D = uniform_weights(ds.n)
    comps, alphas, errors = [], [], []
    for _ in range(T):
        h = learner.train(ds, D)
        eps = weighted_error(h, ds, D)
        if eps >= 1 - 1 / C:
            if not comps:
                warnings.warn(f"first weak learner has error {eps:.3f}; "
                              "keeping it as a single component")
                comps.append(h); alphas.append(1.0); errors.append(eps)
            break
        if eps <= 0:
            alpha = 2 * ALPHA_CAP + math.log(C - 1)
        else:
            alpha = min(math.log((1 - eps) / eps), 2 * ALPHA_CAP) + math.log(C - 1)
        comps.append(h); alphas.append(alpha); errors.append(eps)
        if eps <= 0:
            break
        wrong = h.predict_train(ds) != ds.y
        D = D * np.exp(alpha * wrong)
        D /= D.sum()
    return BoostRun(comps, np.array(alphas), errors)


def boost(ds, learner, T):
    """Two-class AdaBoost or its multi-class counterpart, by class count."""
    return run_adaboost(ds, learner, T) if ds.n_classes == 2 else \
        run_adaboost_multiclass(ds, learner, T)


def train_adaboost(ds, learner, T):
    run = boost(ds, learner, T)
    return Ensemble(run.components, simplex_normalize(run.alpha), ds.n_classes,
                    ds.label_names, info={"adaboost_alpha": run.alpha.tolist(),
                                          "errors": run.errors})
