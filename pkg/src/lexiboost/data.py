"""Datasets, CSV ingestion, stratified splits and the imbalanced Gaussian generator."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

N_DIMS = 5


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticSpec:
    """Two 5-D unit-covariance Gaussians: minority at the origin, majority at ``center * 1``."""

    total_size: int
    imbalance_ratio: float
    center: float
    outlier_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.total_size < 2:
            raise DataError("total_size must be at least 2")
        if not self.imbalance_ratio > 1:
            raise DataError(f"imbalance ratio must exceed 1, got {self.imbalance_ratio}")
        if not 0 <= self.outlier_rate < 1:
            raise DataError("outlier_rate must lie in [0, 1)")
        if self.minority_size < 1 or self.minority_size >= self.total_size:
            raise DataError("these settings leave a class empty")

    @property
    def minority_size(self):
        return int(_round_half_up(self.total_size / (self.imbalance_ratio + 1)))

    @property
    def majority_size(self):
        return self.total_size - self.minority_size


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix plus integer labels ``0..n_classes-1``.

    ``centers`` is only set for generated data; it records the mean of each
    class's generating Gaussian so outliers can be drawn from the opposite class.
    """

    X: np.ndarray
    y: np.ndarray
    n_classes: int
    label_names: tuple = None
    centers: np.ndarray = None
    meta: dict = field(default_factory=dict)
    allow_empty: bool = field(default=False, repr=False)  # test sets may miss a class

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=int)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.size:
            raise DataError("X must be (n, d) and y must have n entries")
        if not np.all(np.isfinite(X)):
            raise DataError("features must be finite")
        if y.size and (y.min() < 0 or y.max() >= self.n_classes):
            raise DataError("label outside 0..n_classes-1")
        if self.n_classes < 2:
            raise DataError("at least two classes are required")
        counts = np.bincount(y, minlength=self.n_classes)
        if np.any(counts == 0) and not self.allow_empty:
            raise DataError(f"class(es) {np.flatnonzero(counts == 0).tolist()} have no instances")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.label_names is None:
            object.__setattr__(self, "label_names", tuple(str(c) for c in range(self.n_classes)))

    @property
    def n(self):
        return self.y.size

    @property
    def dim(self):
        return self.X.shape[1]

    @property
    def class_counts(self):
        return np.bincount(self.y, minlength=self.n_classes)

    @property
    def class_indices(self):
        return [np.flatnonzero(self.y == j) for j in range(self.n_classes)]

    def subset(self, idx):
        idx = np.asarray(idx, dtype=int)
        return Dataset(self.X[idx], self.y[idx], self.n_classes, self.label_names,
                       self.centers, dict(self.meta), self.allow_empty)

    def sign_labels(self):
        """Labels as +1 (class 1) / -1 (class 0); only meaningful for two classes."""
        return np.where(self.y == 1, 1.0, -1.0)


def _round_half_up(v):
    return math.floor(v + 0.5)


def load_csv(path, has_header=False, label_names=None):
    """Read ``features..., label`` rows. Labels become class indices in first-seen order.

    Passing ``label_names`` fixes the mapping instead (e.g. to read a test file
    with a trained model's classes); unknown labels are then an error and
    absent classes are allowed.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if has_header and rows:
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0])
    if width < 2:
        raise DataError(f"{path}: need at least one feature column and a label column")
    fixed = label_names is not None
    names = {str(t): j for j, t in enumerate(label_names)} if fixed else {}
    feats, labels = [], []
    for lineno, row in enumerate(rows, start=2 if has_header else 1):
        if len(row) != width:
            raise DataError(f"{path}: row {lineno} has {len(row)} columns, expected {width}")
        try:
            vals = [float(v) for v in row[:-1]]
        except ValueError as exc:
            raise DataError(f"{path}: row {lineno}: non-numeric feature ({exc})") from None
        if not all(math.isfinite(v) for v in vals):
            raise DataError(f"{path}: row {lineno}: non-finite feature")
        tok = row[-1].strip()
        if fixed and tok not in names:
            raise DataError(f"{path}: row {lineno}: unknown label {tok!r}")
        labels.append(names.setdefault(tok, len(names)))
        feats.append(vals)
    if fixed:
        return Dataset(np.array(feats), np.array(labels), len(names), tuple(names),
                       allow_empty=True)
    if len(names) < 2:
        raise DataError(f"{path}: only one class present")
    return Dataset(np.array(feats), np.array(labels), len(names), tuple(names))


def save_csv(ds, path, header=False):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow([f"x{k}" for k in range(ds.dim)] + ["label"])
        for x, lab in zip(ds.X, ds.y):
            w.writerow([repr(float(v)) for v in x] + [ds.label_names[lab]])


def stratified_split(ds, train_fraction, seed):
    """Per-class shuffled split; class ``j`` contributes ``round(train_fraction * n_j)`` to train."""
    if not 0 < train_fraction < 1:
        raise DataError("train_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for j, idx in enumerate(ds.class_indices):
        k = _round_half_up(train_fraction * idx.size)
        if k < 1 or k >= idx.size:
            raise DataError(f"class {ds.label_names[j]!r} ({idx.size} instances) would be "
                            f"empty on one side of a {train_fraction} split")
        perm = rng.permutation(idx)
        train.append(perm[:k])
        test.append(perm[k:])
    return ds.subset(np.sort(np.concatenate(train))), ds.subset(np.sort(np.concatenate(test)))


def stratified_folds(ds, n_folds, seed):
    """``n_folds`` disjoint test-index arrays, each holding ~1/n_folds of every class."""
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(n_folds)]
    for idx in ds.class_indices:
        for f, part in enumerate(np.array_split(rng.permutation(idx), n_folds)):
            folds[f].append(part)
    return [np.sort(np.concatenate(parts)) for parts in folds]


def _gaussian_dataset(sizes, centers, rng, meta):
    centers = np.asarray(centers, dtype=float)
    X = np.vstack([rng.standard_normal((sz, centers.shape[1])) + c
                   for sz, c in zip(sizes, centers)])
    y = np.repeat(np.arange(len(sizes)), sizes)
    return Dataset(X, y, len(sizes), centers=centers, meta=meta)


def generate_gaussian(spec):
    """Minority (class 0) around the origin, majority (class 1) around ``center * 1``.

    Sampling uses numpy's PCG64 generator and its ziggurat normal sampler, so a
    given seed reproduces the same bytes on every platform. If the settings carry
    a positive ``outlier_rate`` the outliers are injected with the same seed.
    """
    rng = np.random.default_rng(spec.seed)
    centers = np.array([np.zeros(N_DIMS), np.full(N_DIMS, float(spec.center))])
    ds = _gaussian_dataset([spec.minority_size, spec.majority_size], centers, rng,
                           {"spec": asdict(spec)})
    if spec.outlier_rate > 0:
        ds = inject_outliers(ds, spec.outlier_rate, spec.seed)
    return ds


def generate_gaussian_multiclass(sizes, centers, seed):
    """Unit-covariance Gaussian per class with the given sizes and centres."""
    rng = np.random.default_rng(seed)
    return _gaussian_dataset(list(sizes), centers, rng,
                             {"sizes": list(sizes), "centers": np.asarray(centers).tolist(),
                              "seed": seed})


def inject_outliers(ds, rate, seed):
    """Replace ``round(rate * n_j)`` feature vectors of each class with draws from another class.

    For two classes the replacement comes from the opposite class's Gaussian;
    with more classes the donor class is picked uniformly among the others.
    Labels and class counts are unchanged.
    """
    if ds.centers is None:
        raise DataError("outlier injection needs generator metadata; dataset was not synthetic")
    if not 0 <= rate < 0.5:
        raise DataError("outlier rate must lie in [0, 0.5)")
    if rate == 0:
        return ds
    # separate stream from the one used to draw the clean sample
    rng = np.random.default_rng([int(seed), 0x0071E5])
    X = ds.X.copy()
    replaced = []
    for j, idx in enumerate(ds.class_indices):
        k = _round_half_up(rate * idx.size)
        if k >= idx.size:
            raise DataError(f"outlier rate {rate} would replace all of class {j}")
        chosen = np.sort(rng.choice(idx, size=k, replace=False))
        others = [c for c in range(ds.n_classes) if c != j]
        donors = rng.choice(others, size=k) if len(others) > 1 else np.full(k, others[0])
        X[chosen] = rng.standard_normal((k, ds.dim)) + ds.centers[donors]
        replaced.append(chosen.tolist())
    meta = dict(ds.meta, outlier_rate=rate, outliers=replaced)
    return Dataset(X, ds.y, ds.n_classes, ds.label_names, ds.centers, meta)


def save_synthetic(ds, csv_path, sidecar_path):
    save_csv(ds, csv_path)
    meta = {k: v for k, v in ds.meta.items()}
    meta["class_counts"] = ds.class_counts.tolist()
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
