import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lexiboost.data import Dataset, SyntheticSpec, generate_gaussian, generate_gaussian_multiclass
from lexiboost.ensemble import MarginMatrix, margin_matrix
from lexiboost.lp_variants import (LpVariantConfig, dual_lp_adaboost_train, dual_lp_boost_train,
                                   dual_lpu_boost_train, edge_lp, lp_adaboost_weights,
                                   lp_boost_train, lp_boost_weights, lpu_boost_train,
                                   lpu_boost_weights, uneven_bounds)
from lexiboost.weak import LearnerConfig
from oracles import enumerate_lp, grid_min


def _mm(rows, y):
    return MarginMatrix(np.array(rows, float), np.array(y), int(max(y)) + 1)


def soft_objective(m, alpha, costs):
    """min over rho of -rho + sum costs * max(0, rho - m alpha); optimum sits on a margin."""
    rho = m @ alpha
    return min(-r + np.sum(costs * np.maximum(0, r - rho)) for r in rho)


def test_hard_margin_examples():
    a, best = grid_min(lambda a: -min(a - (1 - a), (1 - a) - a))
    alpha, rho = lp_adaboost_weights(_mm([[1, -1], [-1, 1]], [0, 1]))
    np.testing.assert_allclose(alpha, [0.5, 0.5], atol=1e-9)
    assert rho == pytest.approx(-best, abs=1e-9) and rho == pytest.approx(0, abs=1e-9)
    assert lp_adaboost_weights(_mm([[1, 1], [1, 1]], [0, 1]))[1] == pytest.approx(1)
    alpha, rho = lp_adaboost_weights(_mm([[1, -1]], [0]))
    np.testing.assert_allclose(alpha, [1, 0], atol=1e-9)
    assert rho == pytest.approx(1)


def test_soft_margin_with_huge_cost_is_hard_margin():
    rng = np.random.default_rng(3)
    for _ in range(10):
        n = int(rng.integers(3, 15))
        mm = _mm(rng.choice([-1.0, 1.0], (n, 3)), np.r_[0, 1, rng.integers(0, 2, n - 2)])
        _, hard = lp_adaboost_weights(mm)
        _, xi, rho = lp_boost_weights(mm, 1e6)
        assert rho == pytest.approx(hard, abs=1e-7)
        assert np.all(xi <= 1e-9)


def test_soft_margin_against_grid():
    rng = np.random.default_rng(7)
    m = rng.choice([-1.0, 1.0], (150, 2))
    y = np.r_[0, 1, rng.integers(0, 2, 148)]
    cost = 0.01
    _, best = grid_min(lambda a: soft_objective(m, np.array([a, 1 - a]), cost), step=1e-3)
    alpha, xi, rho = lp_boost_weights(MarginMatrix(m, y, 2), cost)
    assert -rho + cost * xi.sum() == pytest.approx(best, abs=1e-6)
    assert best == pytest.approx(0.33, abs=1e-9)


def test_single_instance():
    _, xi, rho = lp_boost_weights(_mm([[1.0, -1.0]], [0]), 1.5)
    assert rho == pytest.approx(1) and xi.tolist() == [0]
    with pytest.raises(ValueError, match="unbounded"):
        lp_boost_weights(_mm([[1.0, -1.0]], [0]), 0.5)


def test_uneven_cost_against_grid():
    m = np.array([[1, -1], [-1, 1], [1, 1], [1, -1], [-1, 1], [1, -1.0]])
    y = np.array([0, 0, 1, 1, 1, 1])
    mm = MarginMatrix(m, y, 2)
    costs = np.where(y == 0, 2 * 0.3, 0.3)
    _, best = grid_min(lambda a: soft_objective(m, np.array([a, 1 - a]), costs))
    alpha, xi, rho = lpu_boost_weights(mm, 0.3, 2.0, target_class=0)
    assert -rho + np.sum(costs * xi) == pytest.approx(best, abs=1e-6)


def test_uneven_cost_with_unit_beta_is_soft_margin():
    rng = np.random.default_rng(9)
    for _ in range(10):
        n = int(rng.integers(4, 20))
        mm = _mm(rng.choice([-1.0, 1.0], (n, 4)), np.r_[0, 1, rng.integers(0, 2, n - 2)])
        a = lp_boost_weights(mm, 0.3)
        b = lpu_boost_weights(mm, 0.3, 1.0)
        for u, v in zip(a, b):
            assert np.array_equal(u, v)


def test_uneven_cost_class_swap_symmetry():
    rng = np.random.default_rng(10)
    for _ in range(10):
        n = 12
        m = rng.choice([-1.0, 1.0], (n, 3))
        y = np.r_[0, 1, rng.integers(0, 2, n - 2)]
        a = lpu_boost_weights(MarginMatrix(m, y, 2), 0.2, 3.0, target_class=0)
        b = lpu_boost_weights(MarginMatrix(m, 1 - y, 2), 0.2, 3.0, target_class=1)
        costs = np.where(y == 0, 0.6, 0.2)  # the same instances carry the heavier price
        obj = lambda r: -r[2] + np.sum(costs * r[1])
        assert obj(a) == pytest.approx(obj(b), abs=1e-9)


def test_uneven_cost_rejects_multiclass():
    mm = _mm([[1], [1], [1]], [0, 1, 2])
    with pytest.raises(ValueError, match="two classes"):
        lpu_boost_weights(mm, 0.5, 2.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_soft_margin_invariants(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 20))
    mm = _mm(rng.choice([-1.0, 1.0], (n, int(rng.integers(1, 5)))),
             np.r_[0, 1, rng.integers(0, 2, n - 2)] if n > 2 else [0, 1])
    alpha, rho = lp_adaboost_weights(mm)
    assert np.sum(alpha) == pytest.approx(1) and np.all(alpha >= -1e-12)
    assert rho == pytest.approx((mm.m @ alpha).min())
    prev = -np.inf
    for cost in (1.0 / n, 2.0 / n, 1.0, 5.0):
        a, xi, r = lp_boost_weights(mm, cost)
        assert np.sum(a) == pytest.approx(1)
        np.testing.assert_allclose(xi, np.maximum(0, r - mm.m @ a), atol=1e-12)
        obj = -r + cost * xi.sum()
        assert obj >= prev - 1e-9  # a larger slack price never helps
        prev = obj
        # slack only ever helps relative to the hard margin
        assert obj <= -rho + 1e-9


def test_bounds_reject_infeasible_triples():
    y = np.repeat([0, 1], [5, 45])
    with pytest.raises(ValueError, match=r"D=.*beta=.*D_LB="):
        uneven_bounds(y, LpVariantConfig(nu=0.99, beta=1.0, d_lb=1.0001))
    with pytest.raises(ValueError, match="admit no distribution"):
        uneven_bounds(y, LpVariantConfig(nu=2.0))
    lo, hi = uneven_bounds(y, LpVariantConfig(nu=0.1, beta=2.0, d_lb=50.0))
    assert hi[0] == pytest.approx(2 / 5) and lo[0] == pytest.approx(hi[0] / 50)


def test_config_validation():
    for bad in (dict(nu=0), dict(beta=0.5), dict(d_lb=1.0), dict(T=0)):
        with pytest.raises(ValueError):
            LpVariantConfig(**bad)


def _toy():
    return Dataset(np.array([[0.0], [1], [2], [3], [4]]), np.array([0, 1, 0, 1, 1]), 2)


def test_column_generation_rounds_match_enumeration():
    ds = _toy()
    cfg = LpVariantConfig(nu=0.5, beta=2.0, d_lb=4.0, T=4)
    lower, upper = uneven_bounds(ds.y, cfg)
    ens = dual_lpu_boost_train(ds, LearnerConfig("stump"), cfg)
    assert ens.rounds
    for t, r in enumerate(ens.rounds, start=1):
        lp = edge_lp(margin_matrix(ens.components[:t], ds), lower, upper)
        status, obj, _ = enumerate_lp(lp.c, lp.A, lp.b, lp.relations, lp.lower, lp.upper)
        assert status == "optimal" and r.s == pytest.approx(obj, abs=1e-9)
        assert np.all(r.D >= lower - 1e-9) and np.all(r.D <= upper + 1e-9)
        assert r.D.sum() == pytest.approx(1)


def test_dual_uneven_collapses_to_dual_soft_margin():
    ds = generate_gaussian(SyntheticSpec(120, 5, 1.7, seed=1))
    cfg = LpVariantConfig(nu=0.2, beta=1.0, d_lb=None, T=6)
    a = dual_lpu_boost_train(ds, LearnerConfig("stump"), cfg)
    b = dual_lp_boost_train(ds, LearnerConfig("stump"), cfg)
    assert a.to_dict() == b.to_dict()


def test_dual_trainers_respect_caps_and_are_deterministic():
    ds = generate_gaussian(SyntheticSpec(150, 5, 1.7, seed=2))
    cfg = LpVariantConfig(nu=0.2, beta=2.0, d_lb=25.0, T=6)
    lower, upper = uneven_bounds(ds.y, cfg)
    ens = dual_lpu_boost_train(ds, LearnerConfig("knn", k=5), cfg)
    for r in ens.rounds:
        assert np.all(r.D <= upper + 1e-9) and np.all(r.D >= lower - 1e-9)
    assert ens.to_dict() == dual_lpu_boost_train(ds, LearnerConfig("knn", k=5), cfg).to_dict()
    hard = dual_lp_adaboost_train(ds, LearnerConfig("stump"), LpVariantConfig(T=5))
    assert sum(hard.alpha) == pytest.approx(1)


def test_uneven_trainers_reject_multiclass():
    ds = generate_gaussian_multiclass([20, 20, 20], np.eye(3) * 3, seed=0)
    with pytest.raises(ValueError, match="two classes"):
        lpu_boost_train(ds, LearnerConfig("stump"))
    with pytest.raises(ValueError, match="two classes"):
        dual_lpu_boost_train(ds, LearnerConfig("stump"))
    # the plain soft margin has no class-specific cost and runs on any class count
    assert dual_lp_boost_train(ds, LearnerConfig("stump"), LpVariantConfig(nu=0.5, T=3)).n_classes == 3
    assert lp_boost_train(ds, LearnerConfig("stump"), LpVariantConfig(T=3)).n_classes == 3
