"""Weak learners trained under an instance-weight distribution.

Each hypothesis maps a feature matrix to one crisp class per row. The
``self_index`` argument of ``predict_labels`` tells a hypothesis which of its
own training instances a query row is, so k-NN can leave that point out of its
vote when it is evaluated on the data it was fitted to.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

_EPS = 1e-12


def normalize_weights(w):
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be a finite non-negative vector")
    total = w.sum()
    if total <= 0:
        raise ValueError("weights must not all be zero")
    return w / total


def uniform_weights(n):
    return np.full(n, 1.0 / n)


def crisp_vectors(labels, n_classes):
    """Prediction vectors: +1 on the predicted class coordinate, -1 elsewhere."""
    out = -np.ones((len(labels), n_classes))
    out[np.arange(len(labels)), labels] = 1.0
    return out


class WeakHypothesis:
    kind = None

    def __init__(self, n_classes, dim):
        self.n_classes = int(n_classes)
        self.dim = int(dim)

    def _check(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.dim:
            raise ValueError(f"expected {self.dim} features, got {X.shape[1]}")
        return X

    def predict_labels(self, X, self_index=None):
        raise NotImplementedError

    def predict(self, X, self_index=None):
        """(n, n_classes) matrix of +-1 prediction vectors."""
        return crisp_vectors(self.predict_labels(X, self_index), self.n_classes)

    def predict_train(self, ds):
        return self.predict_labels(ds.X, np.arange(ds.n))

    def to_dict(self):
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and _canon(self.to_dict()) == _canon(other.to_dict())

    __hash__ = None


def _canon(d):
    return json.dumps(d, sort_keys=True)


class Stump(WeakHypothesis):
    kind = "stump"

    def __init__(self, n_classes, dim, feature, threshold, left, right):
        super().__init__(n_classes, dim)
        self.feature = int(feature)
        self.threshold = float(threshold)
        self.left = int(left)
        self.right = int(right)

    def predict_labels(self, X, self_index=None):
        X = self._check(X)
        return np.where(X[:, self.feature] <= self.threshold, self.left, self.right)

    def to_dict(self):
        return {"kind": self.kind, "n_classes": self.n_classes, "dim": self.dim,
                "feature": self.feature, "threshold": self.threshold,
                "left": self.left, "right": self.right}


class Tree(WeakHypothesis):
    """Binary tree stored as a flat node list; node 0 is the root."""

    kind = "tree"

    def __init__(self, n_classes, dim, nodes, max_depth):
        super().__init__(n_classes, dim)
        self.nodes = nodes
        self.max_depth = int(max_depth)

    def predict_labels(self, X, self_index=None):
        X = self._check(X)
        out = np.empty(X.shape[0], dtype=int)
        stack = [(0, np.arange(X.shape[0]))]
        while stack:
            node_id, rows = stack.pop()
            node = self.nodes[node_id]
            if "leaf" in node:
                out[rows] = node["leaf"]
                continue
            go_left = X[rows, node["feature"]] <= node["threshold"]
            stack.append((node["left"], rows[go_left]))
            stack.append((node["right"], rows[~go_left]))
        return out

    @property
    def depth(self):
        def _d(i):
            node = self.nodes[i]
            return 0 if "leaf" in node else 1 + max(_d(node["left"]), _d(node["right"]))
        return _d(0)

    def to_dict(self):
        return {"kind": self.kind, "n_classes": self.n_classes, "dim": self.dim,
                "max_depth": self.max_depth, "nodes": self.nodes}


class Knn(WeakHypothesis):
    """Weighted k-nearest-neighbour vote over the stored positive-weight sample."""

    kind = "knn"

    def __init__(self, n_classes, dim, k, X, y, w, train_index):
        super().__init__(n_classes, dim)
        self.k = int(k)
        self.X = np.asarray(X, dtype=float).reshape(-1, dim)
        self.y = np.asarray(y, dtype=int)
        self.w = np.asarray(w, dtype=float)
        self.train_index = np.asarray(train_index, dtype=int)

    def predict_labels(self, X, self_index=None, chunk=512):
        X = self._check(X)
        out = np.empty(X.shape[0], dtype=int)
        for start in range(0, X.shape[0], chunk):
            stop = min(start + chunk, X.shape[0])
            diff = X[start:stop, None, :] - self.X[None, :, :]
            dist = np.sqrt(np.einsum("qsd,qsd->qs", diff, diff))
            if self_index is not None:
                own = np.asarray(self_index[start:stop])[:, None] == self.train_index[None, :]
                dist[own] = np.inf
            # stable sort: equal distances resolve to the lower stored index
            order = np.argsort(dist, axis=1, kind="stable")[:, :self.k]
            valid = np.take_along_axis(dist, order, axis=1) < np.inf
            votes = np.zeros((stop - start, self.n_classes))
            rows = np.repeat(np.arange(stop - start), order.shape[1])
            np.add.at(votes, (rows, self.y[order].ravel()),
                      (self.w[order] * valid).ravel())
            out[start:stop] = np.argmax(votes, axis=1)
        return out

    def to_dict(self):
        return {"kind": self.kind, "n_classes": self.n_classes, "dim": self.dim,
                "k": self.k, "X": self.X.tolist(), "y": self.y.tolist(),
                "w": self.w.tolist(), "train_index": self.train_index.tolist()}


def hypothesis_from_dict(d):
    kind = d["kind"]
    if kind == "stump":
        return Stump(d["n_classes"], d["dim"], d["feature"], d["threshold"], d["left"], d["right"])
    if kind == "tree":
        return Tree(d["n_classes"], d["dim"], d["nodes"], d["max_depth"])
    if kind == "knn":
        return Knn(d["n_classes"], d["dim"], d["k"], d["X"], d["y"], d["w"], d["train_index"])
    raise ValueError(f"unknown hypothesis kind {kind!r}")


# -- training ---------------------------------------------------------------

def _class_weight_prefix(x, y, w, n_classes):
    order = np.argsort(x, kind="stable")
    xs = x[order]
    onehot = np.zeros((x.size, n_classes))
    onehot[np.arange(x.size), y[order]] = w[order]
    return xs, np.cumsum(onehot, axis=0)


def _split_candidates(xs):
    """Positions k where a threshold between xs[k] and xs[k+1] separates distinct values."""
    return np.flatnonzero(xs[1:] > xs[:-1])


def _active(ds, D):
    D = normalize_weights(D)
    if D.size != ds.n:
        raise ValueError("weight vector length differs from dataset size")
    keep = D > 0
    return ds.X[keep], ds.y[keep], D[keep], np.flatnonzero(keep)


def train_stump(ds, D):
    """Feature/threshold/class-pair with the lowest D-weighted 0/1 error.

    Thresholds are midpoints between consecutive distinct values of the
    positive-weight points; each side predicts its weighted-majority class.
    """
    X, y, w, _ = _active(ds, D)
    C = ds.n_classes
    totals = np.bincount(y, weights=w, minlength=C)
    best_cls = int(np.argmax(totals))
    best = (1.0 - totals[best_cls], 0, np.inf, best_cls, best_cls)
    for f in range(X.shape[1]):
        xs, cum = _class_weight_prefix(X[:, f], y, w, C)
        cand = _split_candidates(xs)
        if cand.size == 0:
            continue
        left = cum[cand]
        right = totals - left
        err = 1.0 - left.max(axis=1) - right.max(axis=1)
        k = int(np.argmin(err))
        if err[k] < best[0] - _EPS:
            p = cand[k]
            best = (err[k], f, (xs[p] + xs[p + 1]) / 2,
                    int(np.argmax(left[k])), int(np.argmax(right[k])))
    _, f, thr, cl, cr = best
    return Stump(C, ds.dim, f, thr, cl, cr)


def _entropy(counts):
    tot = counts.sum(axis=-1, keepdims=True)
    p = np.divide(counts, tot, out=np.zeros_like(counts), where=tot > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(p > 0, p * np.log2(p), 0.0).sum(axis=-1)
    return h


def train_tree(ds, D, max_depth=3):
    """Greedy depth-limited tree maximising weighted information gain.

    An impure node keeps splitting while depth remains, even when the best gain
    is zero (otherwise XOR-like structure is never found).
    """
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    X, y, w, _ = _active(ds, D)
    C = ds.n_classes
    nodes = []

    def build(rows, depth):
        counts = np.bincount(y[rows], weights=w[rows], minlength=C)
        node_id = len(nodes)
        nodes.append({"leaf": int(np.argmax(counts))})
        if depth >= max_depth or np.count_nonzero(counts) <= 1:
            return node_id
        parent_h = _entropy(counts)
        total = counts.sum()
        best = None
        for f in range(X.shape[1]):
            xs, cum = _class_weight_prefix(X[rows, f], y[rows], w[rows], C)
            cand = _split_candidates(xs)
            if cand.size == 0:
                continue
            left = cum[cand]
            right = counts - left
            lw, rw = left.sum(axis=1), right.sum(axis=1)
            gain = parent_h - (lw * _entropy(left) + rw * _entropy(right)) / total
            k = int(np.argmax(gain))
            if best is None or gain[k] > best[0] + _EPS:
                p = cand[k]
                best = (gain[k], f, (xs[p] + xs[p + 1]) / 2)
        if best is None:
            return node_id
        _, f, thr = best
        go_left = X[rows, f] <= thr
        left_id = build(rows[go_left], depth + 1)
        right_id = build(rows[~go_left], depth + 1)
        nodes[node_id] = {"feature": int(f), "threshold": float(thr),
                          "left": left_id, "right": right_id}
        return node_id

    build(np.arange(y.size), 0)
    return Tree(C, ds.dim, nodes, max_depth)


def train_knn(ds, D, k=5):
    """Store the positive-weight sample; votes are weighted by D."""
    if not 1 <= k <= ds.n:
        raise ValueError(f"k must lie in [1, {ds.n}]")
    X, y, w, idx = _active(ds, D)
    return Knn(ds.n_classes, ds.dim, k, X, y, w, idx)


def weighted_error(h, ds, D, training=True):
    """Sum of D over misclassified instances (leave-one-out for k-NN when ``training``)."""
    D = np.asarray(D, dtype=float)
    pred = h.predict_train(ds) if training else h.predict_labels(ds.X)
    return float(D[pred != ds.y].sum())


@dataclass(frozen=True)
class LearnerConfig:
    kind: str = "knn"
    k: int = 5
    max_depth: int = 3

    def __post_init__(self):
        if self.kind not in ("stump", "tree", "knn"):
            raise ValueError(f"unknown base learner {self.kind!r}")

    def train(self, ds, D):
        if self.kind == "stump":
            return train_stump(ds, D)
        if self.kind == "tree":
            return train_tree(ds, D, self.max_depth)
        return train_knn(ds, D, min(self.k, ds.n))

    def params(self):
        if self.kind == "knn":
            return {"kind": "knn", "k": self.k}
        if self.kind == "tree":
            return {"kind": "tree", "max_depth": self.max_depth}
        return {"kind": "stump"}
