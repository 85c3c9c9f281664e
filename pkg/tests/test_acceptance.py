"""Acceptance checks, one per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (the lines are repeated in the
terminal summary) or directly with ``python tests/test_acceptance.py``.
"""

import argparse
import functools
import json
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from lexiboost import cli
from lexiboost.data import (SyntheticSpec, generate_gaussian, generate_gaussian_multiclass,
                            stratified_split)
from lexiboost.dual_lexiboost import check_distribution, stage1_dual_lp, train_dual_lexiboost
from lexiboost.ensemble import MarginMatrix, hinge_loss, train_adaboost
from lexiboost.lexiboost import (lexicographic_weights, solve_stage1, solve_stage1_all,
                                 solve_stage2, train_lexiboost)
from lexiboost.lp import LinearProgram, solve
from lexiboost.lp_variants import (LpVariantConfig, dual_lp_boost_train,
                                   dual_lpu_boost_train, lp_boost_weights, lpu_boost_weights)
from lexiboost.metrics import evaluate
from lexiboost.weak import LearnerConfig
from oracles import enumerate_lp, random_lp

LINES = {}


def report(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    LINES[n] = line
    print(line)
    return ok


def random_mm(rng, n_max=40, t_max=6):
    n = int(rng.integers(4, n_max + 1))
    T = int(rng.integers(1, t_max + 1))
    y = np.r_[0, 1, rng.integers(0, 2, n - 2)]
    return MarginMatrix(rng.choice([-1.0, 1.0], (n, T)), y, 2)


def test_criterion_1_solver_matches_enumeration():
    rng = np.random.default_rng(1)
    agree = close = optimal = 0
    spent = 0.0
    for _ in range(200):
        d = random_lp(rng, max_vars=6, max_rows=8)
        status, obj, _ = enumerate_lp(**d)
        t0 = time.perf_counter()
        sol = solve(LinearProgram(d["c"], d["A"], d["b"], d["relations"], d["lower"],
                                  d["upper"], d["maximize"]))
        spent += time.perf_counter() - t0
        agree += sol.status.value == status
        if status == "optimal":
            optimal += 1
            close += abs(sol.objective - obj) <= 1e-6
    ok = agree == 200 and close == optimal and spent < 10
    assert report(1, ok, f"status agreement {agree}/200, objectives within 1e-6 "
                         f"{close}/{optimal}, solver time {spent:.2f}s")


def test_criterion_2_strong_duality():
    rng = np.random.default_rng(2)
    gaps = []
    for _ in range(50):
        mm = random_mm(rng)
        for j in range(2):
            gaps.append(abs(solve_stage1(mm, j).loss - solve(stage1_dual_lp(mm, j)).objective))
    worst = max(gaps)
    assert report(2, worst < 1e-6, f"largest primal/dual gap {worst:.2e} over 50 matrices")


@functools.lru_cache(maxsize=None)
def _stage_instances():
    rng = np.random.default_rng(3)
    out = []
    for _ in range(20):
        mm = random_mm(rng, n_max=30, t_max=5)
        out.append((mm, *lexicographic_weights(mm)))
    return out


def test_criterion_3_sampling_never_beats_the_stages():
    rng = np.random.default_rng(30)
    worst_l = worst_chi = -np.inf
    for mm, s1, s2 in _stage_instances():
        A = rng.dirichlet(np.ones(mm.n_components), 10_000)
        loss = hinge_loss(mm.m @ A.T)
        per_class = np.array([loss[idx].mean(axis=0) for idx in mm.class_indices])
        worst_l = max(worst_l, float((s1.losses[:, None] - per_class).max()))
        worst_chi = max(worst_chi,
                        float((s2.chi - (per_class - s1.losses[:, None]).max(axis=0)).max()))
    ok = worst_l <= 1e-7 and worst_chi <= 1e-7
    assert report(3, ok, f"best sampled improvement: stage one {worst_l:.2e}, "
                         f"stage two {worst_chi:.2e} (limit 1e-7)")


def test_criterion_4_hinge_identity():
    worst = 0.0
    for mm, s1, s2 in _stage_instances():
        for j, r in enumerate(s1.per_class):
            rho = mm.m[mm.class_indices[j]] @ r.alpha
            worst = max(worst, float(np.abs(r.lam - np.maximum(0, 1 - rho)).max()))
        worst = max(worst, float(np.abs(s2.lam - np.maximum(0, 1 - mm.m @ s2.alpha)).max()))
    assert report(4, worst <= 1e-7, f"largest |lambda - max(0, 1 - rho)| = {worst:.2e}")


def test_criterion_5_symmetric_toy():
    mm = MarginMatrix(np.array([[1.0, -1.0], [-1.0, 1.0]]), np.array([0, 1]), 2)
    _, s2 = lexicographic_weights(mm)
    ok = np.allclose(s2.alpha, [0.5, 0.5], atol=1e-6) and abs(s2.chi - 1) <= 1e-6
    assert report(5, ok, f"alpha = {np.round(s2.alpha, 9).tolist()}, chi = {s2.chi:.9f}")


def _fit(algo, tr):
    learner = LearnerConfig("knn", k=5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if algo == "adaboost":
            return train_adaboost(tr, learner, 10)
        if algo == "lexiboost":
            return train_lexiboost(tr, learner, 10)
        return train_dual_lexiboost(tr, learner, 10)


ALGOS = ("adaboost", "lexiboost", "dual_lexiboost")


@functools.lru_cache(maxsize=None)
def _binary_runs(outlier_rate):
    scores = {a: [] for a in ALGOS}
    traces = []
    for seed in range(10):
        ds = generate_gaussian(SyntheticSpec(500, 10, 1.7, outlier_rate, seed))
        tr, te = stratified_split(ds, 0.7, seed)
        for a in ALGOS:
            ens = _fit(a, tr)
            scores[a].append(evaluate(ens, te).g_mean)
            if a == "dual_lexiboost":
                traces.append((tr.y, ens.trace))
    return {a: float(np.mean(v)) for a, v in scores.items()}, traces


@pytest.mark.slow
def test_criterion_6_synthetic_ordering():
    t0 = time.perf_counter()
    clean, _ = _binary_runs(0.0)
    noisy, _ = _binary_runs(0.1)
    elapsed = time.perf_counter() - t0
    checks = {"clean lexi>ada": clean["lexiboost"] > clean["adaboost"],
              "clean dual>ada": clean["dual_lexiboost"] > clean["adaboost"],
              "outliers lexi>ada": noisy["lexiboost"] > noisy["adaboost"],
              "outliers dual>ada": noisy["dual_lexiboost"] > noisy["adaboost"]}
    fmt = lambda m: "/".join(f"{m[a]:.4f}" for a in ALGOS)
    failed = [k for k, v in checks.items() if not v]
    ok = not failed and elapsed < 600
    assert report(6, ok, f"mean G-Mean ada/lexi/dual clean {fmt(clean)}, 10% outliers "
                         f"{fmt(noisy)}; {elapsed:.0f}s"
                         + (f"; failing: {', '.join(failed)}" if failed else ""))


@functools.lru_cache(maxsize=None)
def _multiclass_runs():
    centers = [np.zeros(5), np.full(5, 1.7), np.full(5, -1.7)]
    scores = {"adaboost": [], "dual_lexiboost": []}
    traces = []
    for seed in range(5):
        ds = generate_gaussian_multiclass([400, 80, 40], centers, seed=seed)
        tr, te = stratified_split(ds, 0.7, seed)
        for a in scores:
            ens = _fit(a, tr)
            scores[a].append(evaluate(ens, te).g_mean)
            if a == "dual_lexiboost":
                traces.append((tr.y, ens.trace))
    return {a: float(np.mean(v)) for a, v in scores.items()}, traces


@pytest.mark.slow
def test_criterion_7_multiclass():
    means, _ = _multiclass_runs()
    ok = means["dual_lexiboost"] >= means["adaboost"]
    assert report(7, ok, f"mean G-Mean dual {means['dual_lexiboost']:.4f} vs "
                         f"adaboost {means['adaboost']:.4f}")


@pytest.mark.slow
def test_criterion_8_dual_weight_invariants():
    checked = bad = 0
    for runs in (_binary_runs(0.0)[1], _binary_runs(0.1)[1], _multiclass_runs()[1]):
        for y, trace in runs:
            for _, D, upper in trace.distributions:
                checked += 1
                bad += not check_distribution(D, y, upper, tol=1e-9)
    assert report(8, bad == 0 and checked > 0,
                  f"{checked - bad}/{checked} distributions sum to 1 and respect their bounds")


def _no_timing(path):
    obj = json.loads(Path(path).read_text())
    obj.pop("timing", None)
    for r in obj.get("rows", []):
        r.pop("timing", None)
    return obj


def _csv_no_seconds(path):
    return [line.rsplit(",", 1)[0] for line in Path(path).read_text().splitlines()]


def test_criterion_9_determinism(tmp_path):
    data = tmp_path / "d.csv"
    assert cli.main(["gen", "--size", "300", "--ir", "10", "--seed", "4", "--out", str(data)]) == 0
    same = []
    for algo in ("lexiboost", "dual_lexiboost", "dual_lpuboost"):
        outs = []
        for rep in "ab":
            m, r = tmp_path / f"{algo}{rep}.json", tmp_path / f"{algo}{rep}.report.json"
            assert cli.main(["train", "--data", str(data), "--algo", algo, "--T", "5",
                             "--model", str(m), "--report", str(r)]) == 0
            outs.append((m.read_bytes(), _no_timing(r)))
        same.append(outs[0] == outs[1])
    bench = tmp_path / "bench.json"
    bench.write_text(json.dumps({"algorithms": ["adaboost", "dual_lexiboost", "lpuboost"],
                                 "seeds": [0, 1], "synthetic": {"sizes": [150], "irs": [5]},
                                 "T": 3, "grid": {"nu": [0.1], "beta": [2, 4]}}))
    for rep, workers in (("a", "1"), ("b", "2")):
        assert cli.main(["bench", "--config", str(bench), "--out", str(tmp_path / rep),
                         "--workers", workers]) == 0
    same.append(_no_timing(tmp_path / "a" / "results.json")
                == _no_timing(tmp_path / "b" / "results.json"))
    same.append(_csv_no_seconds(tmp_path / "a" / "results.csv")
                == _csv_no_seconds(tmp_path / "b" / "results.csv"))
    assert report(9, all(same), f"{sum(same)}/{len(same)} repeated outputs identical "
                                "apart from timing")


def test_criterion_10_collapse_identities():
    ds = generate_gaussian(SyntheticSpec(150, 5, 1.7, seed=10))
    cfg = LpVariantConfig(nu=0.2, beta=1.0, d_lb=None, T=6)
    learner = LearnerConfig("knn", k=5)
    dual_same = (dual_lpu_boost_train(ds, learner, cfg).to_dict()
                 == dual_lp_boost_train(ds, learner, cfg).to_dict())
    rng = np.random.default_rng(10)
    primal_same = stage2_same = True
    for _ in range(10):
        mm = random_mm(rng, n_max=25, t_max=5)
        a, b = lp_boost_weights(mm, 0.25), lpu_boost_weights(mm, 0.25, 1.0)
        primal_same &= all(np.array_equal(u, v) for u, v in zip(a, b))
        s1 = solve_stage1_all(mm)
        p, q = solve_stage2(mm, s1), solve_stage2(mm, s1, costs=np.ones(2))
        stage2_same &= np.array_equal(p.alpha, q.alpha) and p.chi == q.chi
    ok = dual_same and primal_same and stage2_same
    assert report(10, ok, f"dual uneven=soft {dual_same}, primal uneven=soft {primal_same}, "
                          f"unit-cost stage two=plain {stage2_same}")


def main(argv=None):
    p = argparse.ArgumentParser(description="Run the acceptance checks and print one line each.")
    p.add_argument("--only", type=int, nargs="+", help="criterion numbers to run")
    args = p.parse_args(argv)
    return pytest.main([__file__, "-q", "-p", "no:cacheprovider"]
                       + (["-k", " or ".join(f"criterion_{n}_" for n in args.only)]
                          if args.only else []))


if __name__ == "__main__":
    sys.exit(main())
