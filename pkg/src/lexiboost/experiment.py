"""Algorithm registry, cost-grid selection and the benchmark grid runner."""

from __future__ import annotations

import hashlib
import itertools
import json
import logging
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import SyntheticSpec, generate_gaussian, load_csv, stratified_folds, stratified_split
from .dual_lexiboost import train_dual_lexiboost
from .ensemble import train_adaboost
from .lexiboost import train_lexiboost
from .lp_variants import (LpVariantConfig, dual_lp_adaboost_train, dual_lp_boost_train,
                          dual_lpu_boost_train, lp_adaboost_train, lp_boost_train,
                          lpu_boost_train)
from .metrics import evaluate
from .weak import LearnerConfig

log = logging.getLogger(__name__)

RESULTS_SCHEMA = "lexiboost-results/1"

# default comparator grids
DEFAULT_GRID = {"nu": [0.1, 0.2], "beta": [2.0, 4.0, 8.0], "d_lb": [25.0, 50.0, 100.0]}

# algorithm -> which grid axes it is tuned over
TUNED = {
    "lpboost": ("nu",),
    "lpuboost": ("nu", "beta"),
    "dual_lpboost": ("nu",),
    "dual_lpuboost": ("nu", "beta", "d_lb"),
}
BINARY_ONLY = {"lpuboost", "dual_lpuboost"}
ALGORITHMS = ("adaboost", "lexiboost", "dual_lexiboost", "lpadaboost", "dual_lpadaboost",
              "lpboost", "dual_lpboost", "lpuboost", "dual_lpuboost")


class ConfigError(ValueError):
    pass


def check_combination(algo, n_classes):
    if algo not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")
    if algo in BINARY_ONLY and n_classes != 2:
        raise ConfigError(f"{algo} uses per-class uneven costs and needs exactly two classes "
                          f"(data has {n_classes})")


def train(algo, ds, learner, T=10, params=None, costs=None):
    """Train ``algo`` on ``ds``. ``params`` holds comparator settings (nu, beta, d_lb)."""
    check_combination(algo, ds.n_classes)
    params = dict(params or {})
    if algo == "adaboost":
        return train_adaboost(ds, learner, T)
    if algo == "lexiboost":
        return train_lexiboost(ds, learner, T, costs=costs)
    if algo == "dual_lexiboost":
        return train_dual_lexiboost(ds, learner, T, threshold=params.get("threshold"))
    cfg = LpVariantConfig(nu=params.get("nu", 0.1), beta=params.get("beta", 1.0),
                          d_lb=params.get("d_lb"), T=T)
    return {"lpadaboost": lp_adaboost_train, "dual_lpadaboost": dual_lp_adaboost_train,
            "lpboost": lp_boost_train, "dual_lpboost": dual_lp_boost_train,
            "lpuboost": lpu_boost_train, "dual_lpuboost": dual_lpu_boost_train}[algo](
        ds, learner, cfg)


def grid_cells(algo, grid=None):
    grid = {**DEFAULT_GRID, **(grid or {})}
    axes = TUNED.get(algo, ())
    return [dict(zip(axes, vals)) for vals in itertools.product(*(grid[a] for a in axes))]


def select_cell(algo, ds, learner, T, grid=None, n_folds=3, seed=0):
    """Pick the grid cell with the best mean cross-validated G-Mean (first cell wins ties)."""
    cells = grid_cells(algo, grid)
    if len(cells) <= 1:
        return (cells[0] if cells else {}), []
    folds = stratified_folds(ds, n_folds, seed)
    scores = []
    for cell in cells:
        vals = []
        for test_idx in folds:
            mask = np.ones(ds.n, dtype=bool)
            mask[test_idx] = False
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    ens = train(algo, ds.subset(np.flatnonzero(mask)), learner, T, cell)
                    vals.append(evaluate(ens, ds.subset(test_idx)).g_mean)
            except ValueError:
                vals.append(0.0)  # infeasible weight bounds for this fold
        scores.append(float(np.mean(vals)))
    best = int(np.argmax(scores))
    return cells[best], [{"cell": c, "cv_g_mean": s} for c, s in zip(cells, scores)]


def config_hash(cfg):
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# -- bench ------------------------------------------------------------------

@dataclass
class BenchConfig:
    algorithms: list
    seeds: list = field(default_factory=lambda: [0])
    synthetic: dict | None = None
    csv: list | None = None
    base: dict = field(default_factory=lambda: {"kind": "knn", "k": 5})
    T: int = 10
    train_fraction: float = 0.7
    cv_folds: int = 3
    grid: dict = field(default_factory=dict)
    workers: int = 1

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown bench config keys: {sorted(extra)}")
        if "algorithms" not in d:
            raise ConfigError("bench config needs an 'algorithms' list")
        cfg = cls(**d)
        for a in cfg.algorithms:
            if a not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {a!r}")
        if not cfg.synthetic and not cfg.csv:
            raise ConfigError("bench config needs 'synthetic' or 'csv' datasets")
        learner_from(cfg.base)
        return cfg

    def canonical(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "workers"}
        d["grid"] = {**DEFAULT_GRID, **self.grid}
        return d

    def dataset_cells(self):
        cells = []
        if self.synthetic:
            s = self.synthetic
            for size, ir, center, rate in itertools.product(
                    s.get("sizes", [500]), s.get("irs", [10]), s.get("centers", [1.7]),
                    s.get("outlier_rates", [0.0])):
                cells.append({"source": "synthetic", "size": size, "ir": ir,
                              "center": center, "outlier_rate": rate})
        for path in self.csv or []:
            cells.append({"source": "csv", "path": str(path)})
        return cells


def learner_from(base):
    base = dict(base)
    kind = base.pop("kind", "knn")
    try:
        return LearnerConfig(kind, **base)
    except TypeError as exc:
        raise ConfigError(f"bad base learner parameters: {exc}") from None


def _load_cell(cell, seed):
    if cell["source"] == "synthetic":
        return generate_gaussian(SyntheticSpec(cell["size"], cell["ir"], cell["center"],
                                               cell["outlier_rate"], seed))
    return load_csv(cell["path"])


def run_job(job):
    """One (dataset cell, algorithm, seed) row; failures are recorded, not raised."""
    cell, algo, seed, cfg, chash = job
    row = {"config_hash": chash, "dataset": cell, "algorithm": algo, "seed": seed,
           "base_learner": cfg.base, "T": cfg.T, "selected": None, "status": "ok"}
    t0 = time.perf_counter()
    try:
        learner = learner_from(cfg.base)
        ds = _load_cell(cell, seed)
        check_combination(algo, ds.n_classes)
        tr, te = stratified_split(ds, cfg.train_fraction, seed)
        params = {}
        if algo in TUNED:
            params, cv = select_cell(algo, tr, learner, cfg.T, cfg.grid, cfg.cv_folds, seed)
            row["selected"] = params
            row["cv"] = cv
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            ens = train(algo, tr, learner, cfg.T, params)
            rep = evaluate(ens, te)
        row["metrics"] = rep.to_dict()
        row["n_components"] = len(ens.components)
        if caught:
            row["warnings"] = sorted({str(w.message) for w in caught})
    except Exception as exc:  # noqa: BLE001 - a failed cell must not stop the grid
        row["status"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
    row["timing"] = {"seconds": time.perf_counter() - t0}
    return row


def run_bench(cfg):
    chash = config_hash(cfg.canonical())
    jobs = [(cell, algo, seed, cfg, chash)
            for cell in cfg.dataset_cells() for algo in cfg.algorithms for seed in cfg.seeds]
    log.info("bench: %d jobs, config %s", len(jobs), chash)
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            rows = list(pool.map(run_job, jobs))  # map keeps submission order
    else:
        rows = [run_job(j) for j in jobs]
    return {"schema": RESULTS_SCHEMA, "config_hash": chash, "config": cfg.canonical(),
            "rows": rows}


CSV_COLUMNS = ("config_hash", "dataset", "algorithm", "seed", "status", "selected",
               "g_mean", "auc", "avg_auc", "accuracy", "n_components", "seconds")


def result_table(results):
    """Flat rows for the CSV output."""
    out = []
    for r in results["rows"]:
        m = r.get("metrics", {})
        ds = r["dataset"]
        name = ds["path"] if ds["source"] == "csv" else \
            f"n{ds['size']}_ir{ds['ir']}_c{ds['center']}_o{ds['outlier_rate']}"
        sel = ";".join(f"{k}={v}" for k, v in sorted((r["selected"] or {}).items()))
        out.append([r["config_hash"], name, r["algorithm"], r["seed"], r["status"], sel,
                    m.get("g_mean", ""), m.get("auc", ""), m.get("avg_auc", ""),
                    m.get("accuracy", ""), r.get("n_components", ""),
                    f"{r['timing']['seconds']:.3f}"])
    return out
