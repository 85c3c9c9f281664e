"""Command-line entry point: ``lexiboost {gen,train,eval,bench}``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 LP solver failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import experiment
from .data import DataError, SyntheticSpec, generate_gaussian, load_csv, save_synthetic
from .ensemble import Ensemble
from .lp import SolverError
from .metrics import evaluate

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3

log = logging.getLogger("lexiboost")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_json(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None


# -- gen -----------------------------------------------------------------------

def cmd_gen(args):
    if not args.ir > 1:
        raise UsageError("--ir must be greater than 1")
    if args.size < 2:
        raise UsageError("--size must be at least 2")
    try:
        spec = SyntheticSpec(args.size, args.ir, args.center, args.outlier_rate, args.seed)
    except (ValueError, DataError) as exc:
        raise UsageError(str(exc)) from None
    ds = generate_gaussian(spec)
    sidecar = args.sidecar or str(Path(args.out).with_suffix(".json"))
    save_synthetic(ds, args.out, sidecar)
    log.info("wrote %s (%s rows per class) and %s", args.out, ds.class_counts.tolist(), sidecar)
    return EXIT_OK


# -- train ---------------------------------------------------------------------

TRAIN_KEYS = ("data", "algo", "base", "k", "depth", "T", "nu", "beta", "d_lb", "costs",
              "threshold", "header", "model", "report")
OUTPUT_KEYS = ("model", "report")  # where results go, not what was trained
TRAIN_DEFAULTS = {"algo": "lexiboost", "base": "knn", "k": 5, "depth": 3, "T": 10,
                  "header": False}


def _train_config(args):
    cfg = dict(TRAIN_DEFAULTS)
    if args.config:
        loaded = _read_json(args.config)
        unknown = set(loaded) - set(TRAIN_KEYS)
        if unknown:
            raise UsageError(f"unknown train config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key in TRAIN_KEYS:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            cfg[key] = val
    for key in ("data", "model"):
        if not cfg.get(key):
            raise UsageError(f"--{key} is required (flag or config file)")
    return cfg


def cmd_train(args):
    cfg = _train_config(args)
    ds = load_csv(cfg["data"], has_header=cfg["header"])
    base = {"kind": cfg["base"]}
    if cfg["base"] == "knn":
        base["k"] = cfg["k"]
    elif cfg["base"] == "tree":
        base["max_depth"] = cfg["depth"]
    try:
        learner = experiment.learner_from(base)
        experiment.check_combination(cfg["algo"], ds.n_classes)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    params = {k: cfg[k] for k in ("nu", "beta", "d_lb", "threshold") if cfg.get(k) is not None}
    costs = cfg.get("costs")
    if costs is not None and len(costs) != ds.n_classes:
        raise UsageError(f"--costs needs one value per class ({ds.n_classes})")
    t0 = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            ens = experiment.train(cfg["algo"], ds, learner, cfg["T"], params, costs)
        except experiment.ConfigError as exc:
            raise UsageError(str(exc)) from None
        except ValueError as exc:
            if isinstance(exc, (DataError, SolverError)):
                raise
            raise UsageError(str(exc)) from None
    elapsed = time.perf_counter() - t0
    ens.save(cfg["model"])
    report = {"algorithm": cfg["algo"], "base_learner": learner.params(), "T": cfg["T"],
              "params": params, "n_train": ds.n, "class_counts": ds.class_counts.tolist(),
              "config_hash": experiment.config_hash(
                  {k: v for k, v in cfg.items() if k not in OUTPUT_KEYS}), "alpha": ens.alpha.tolist(),
              "alpha_sum": float(ens.alpha.sum()), "n_components": len(ens.components),
              "details": ens.info, "timing": {"train_seconds": elapsed}}
    s2 = ens.info.get("stage2")
    if s2:
        report["chi"] = s2["chi"]
        report["L_star"] = ens.info["stage1"]["L_star"]
    if caught:
        report["warnings"] = sorted({str(w.message) for w in caught})
    if cfg.get("report"):
        _write_json(report, cfg["report"])
    log.info("trained %s: %d components", cfg["algo"], len(ens.components))
    return EXIT_OK


# -- eval ------------------------------------------------------------------------

def cmd_eval(args):
    try:
        ens = Ensemble.load(args.model)
    except OSError as exc:
        raise DataError(f"cannot read model {args.model}: {exc}") from None
    except (KeyError, ValueError) as exc:
        raise DataError(f"{args.model}: not a model file ({exc})") from None
    names = ens.label_names or tuple(str(c) for c in range(ens.n_classes))
    ds = load_csv(args.data, has_header=args.header, label_names=names)
    _write_json(evaluate(ens, ds).to_dict(), args.out)
    return EXIT_OK


# -- bench -----------------------------------------------------------------------

def cmd_bench(args):
    raw = _read_json(args.config)
    if args.workers is not None:
        raw["workers"] = args.workers
    try:
        cfg = experiment.BenchConfig.from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    results = experiment.run_bench(cfg)
    _write_json(results, out / "results.json")
    with open(out / "results.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(experiment.CSV_COLUMNS)
        w.writerows(experiment.result_table(results))
    failed = sum(r["status"] != "ok" for r in results["rows"])
    log.info("bench: %d rows (%d failed) in %s", len(results["rows"]), failed, out)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="lexiboost", description="Boosting for imbalanced data.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a synthetic imbalanced Gaussian dataset")
    g.add_argument("--size", type=int, required=True)
    g.add_argument("--ir", type=float, required=True, help="majority / minority size")
    g.add_argument("--center", type=float, default=1.7, help="majority centre coordinate")
    g.add_argument("--outlier-rate", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="CSV path")
    g.add_argument("--sidecar", help="JSON metadata path (default: CSV path with .json)")
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("train", help="train a model on a CSV")
    t.add_argument("--config", help="JSON file with any of the options below")
    t.add_argument("--data")
    t.add_argument("--header", action="store_true", default=None)
    t.add_argument("--algo", choices=experiment.ALGORITHMS)
    t.add_argument("--base", choices=("knn", "tree", "stump"))
    t.add_argument("--k", type=int)
    t.add_argument("--depth", type=int)
    t.add_argument("--T", type=int)
    t.add_argument("--nu", type=float)
    t.add_argument("--beta", type=float)
    t.add_argument("--d-lb", dest="d_lb", type=float)
    t.add_argument("--costs", type=float, nargs="+", help="per-class costs (lexiboost)")
    t.add_argument("--threshold", type=float, help="round error limit (dual_lexiboost)")
    t.add_argument("--model")
    t.add_argument("--report")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a saved model on a CSV")
    e.add_argument("--model", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--header", action="store_true")
    e.add_argument("--out", default="-")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="run a dataset x algorithm x seed grid")
    b.add_argument("--config", required=True)
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--workers", type=int)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"lexiboost {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"lexiboost {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverError as exc:
        print(f"lexiboost {args.command}: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
