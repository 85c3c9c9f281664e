"""Margin-maximising LP boosters used as comparators.

Three primal weightings of a fixed component pool (hard margin, soft margin,
soft margin with a heavier slack cost on one target class) and the matching
column-generation trainers driven by their duals.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .ensemble import Ensemble, boost, margin_matrix, simplex_normalize
from .lp import LinearProgram, solve_or_raise
from .weak import uniform_weights, weighted_error


@dataclass(frozen=True)
class LpVariantConfig:
    """Comparator hyper-parameters.

    ``nu`` sets the slack cost ``1 / (nu * n)`` per instance. ``beta`` multiplies
    it for the target class, and ``d_lb`` divides each weight cap to give the
    matching lower bound (``None`` means no lower bound).
    """

    nu: float = 0.1
    beta: float = 1.0
    d_lb: float | None = None
    T: int = 10
    tol: float = 1e-6
    target_class: int | None = None

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if not self.beta >= 1:
            raise ValueError("beta must be at least 1")
        if self.d_lb is not None and not self.d_lb > 1:
            raise ValueError("d_lb is a divisor of the cap and must exceed 1")
        if self.T < 1:
            raise ValueError("T must be at least 1")

    def cost(self, n):
        return 1.0 / (self.nu * n)

    def params(self):
        return {"nu": self.nu, "beta": self.beta, "d_lb": self.d_lb}


# -- primal weightings ------------------------------------------------------------

def lp_adaboost_weights(mm):
    """Simplex weights maximising the smallest margin. Returns ``(alpha, rho)``."""
    n, T = mm.n, mm.n_components
    # variables: alpha (T), rho (free)
    c = np.concatenate([np.zeros(T), [1.0]])
    A = np.vstack([np.hstack([-mm.m, np.ones((n, 1))]),
                   np.concatenate([np.ones(T), [0.0]])])
    b = np.concatenate([np.zeros(n), [1.0]])
    lower = np.concatenate([np.zeros(T), [-np.inf]])
    sol = solve_or_raise(LinearProgram(c, A, b, ["<="] * n + ["="], lower, None,
                                       maximize=True), "hard-margin LP")
    alpha = sol.x[:T]
    return alpha, float((mm.m @ alpha).min())


def _soft_margin(mm, slack_costs, what):
    n, T = mm.n, mm.n_components
    if np.sum(slack_costs) < 1 - 1e-12:
        # raising rho by one then costs less than one: the margin runs off to infinity
        raise ValueError(f"{what}: slack costs sum to {np.sum(slack_costs):.4g} < 1, "
                         "so the margin is unbounded (need nu <= 1)")
    # variables: alpha (T), xi (n), rho (free); minimise -rho + sum cost_i xi_i
    c = np.concatenate([np.zeros(T), slack_costs, [-1.0]])
    A = np.zeros((n + 1, T + n + 1))
    A[:n, :T] = -mm.m
    A[:n, T:T + n] = -np.eye(n)
    A[:n, -1] = 1.0
    A[n, :T] = 1.0
    b = np.concatenate([np.zeros(n), [1.0]])
    lower = np.concatenate([np.zeros(T + n), [-np.inf]])
    sol = solve_or_raise(LinearProgram(c, A, b, ["<="] * n + ["="], lower, None), what)
    alpha, rho = sol.x[:T], float(sol.x[-1])
    xi = np.maximum(0.0, rho - mm.m @ alpha)
    return alpha, xi, rho


def lp_boost_weights(mm, cost):
    """Soft-margin weights: minimise ``-rho + cost * sum(xi)``. Returns ``(alpha, xi, rho)``."""
    if not cost > 0:
        raise ValueError("slack cost must be positive")
    return _soft_margin(mm, np.full(mm.n, float(cost)), "soft-margin LP")


def _target(mm, target_class):
    if mm.n_classes != 2:
        raise ValueError("uneven-cost boosting is defined for two classes only")
    if target_class is None:
        return int(np.argmin(mm.class_counts))
    if target_class not in (0, 1):
        raise ValueError(f"target_class must be 0 or 1, got {target_class}")
    return int(target_class)


def lpu_boost_weights(mm, cost, beta, target_class=None):
    """Soft margin with slack cost ``beta * cost`` on the target class (default: the smaller one)."""
    if not cost > 0:
        raise ValueError("slack cost must be positive")
    if not beta >= 1:
        raise ValueError("beta must be at least 1")
    target = _target(mm, target_class)
    costs = np.where(mm.y == target, beta * cost, cost)
    return _soft_margin(mm, costs, "uneven soft-margin LP")


def _primal_train(ds, learner, cfg, weigh, name):
    run = boost(ds, learner, cfg.T)
    mm = margin_matrix(run.components, ds, training=True)
    alpha = weigh(mm)
    info = {"algorithm": name, "n_components": len(run.components), **cfg.params()}
    return Ensemble(run.components, simplex_normalize(alpha), ds.n_classes,
                    ds.label_names, info=info)


def lp_adaboost_train(ds, learner, cfg=LpVariantConfig()):
    return _primal_train(ds, learner, cfg, lambda mm: lp_adaboost_weights(mm)[0], "lpadaboost")


def lp_boost_train(ds, learner, cfg=LpVariantConfig()):
    return _primal_train(ds, learner, cfg,
                         lambda mm: lp_boost_weights(mm, cfg.cost(ds.n))[0], "lpboost")


def lpu_boost_train(ds, learner, cfg=LpVariantConfig(beta=2.0)):
    if ds.n_classes != 2:
        raise ValueError("uneven-cost boosting is defined for two classes only")
    return _primal_train(
        ds, learner, cfg,
        lambda mm: lpu_boost_weights(mm, cfg.cost(ds.n), cfg.beta, cfg.target_class)[0],
        "lpuboost")


# -- dual (column generation) trainers ----------------------------------------

def edge_lp(mm, lower=None, upper=None):
    """min s  s.t.  D . m_tau <= s for every column, sum D = 1, lower <= D <= upper.

    Variable order: ``D`` (n), ``s``. The multipliers of the column rows are the
    component weights of the matching primal.
    """
    n, T = mm.n, mm.n_components
    c = np.concatenate([np.zeros(n), [1.0]])
    A = np.vstack([np.hstack([mm.m.T, -np.ones((T, 1))]),
                   np.concatenate([np.ones(n), [0.0]])])
    b = np.concatenate([np.zeros(T), [1.0]])
    lo = np.zeros(n) if lower is None else np.asarray(lower, dtype=float)
    hi = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    return LinearProgram(c, A, b, ["<="] * T + ["="], np.append(lo, -np.inf),
                         np.append(hi, np.inf))


def uneven_bounds(y, cfg, n=None):
    """Per-instance ``(lower, upper)`` weight bounds for the dual uneven-cost LP."""
    n = y.size if n is None else n
    counts = np.bincount(y, minlength=2)
    target = int(np.argmin(counts)) if cfg.target_class is None else cfg.target_class
    upper = np.where(y == target, cfg.beta * cfg.cost(n), cfg.cost(n))
    lower = np.zeros(n) if cfg.d_lb is None else upper / cfg.d_lb
    if lower.sum() > 1 + 1e-12 or upper.sum() < 1 - 1e-12:
        raise ValueError(f"weight bounds admit no distribution for (D={cfg.cost(n):.6g}, "
                         f"beta={cfg.beta}, D_LB={cfg.d_lb}): "
                         f"sum of lower bounds {lower.sum():.4g}, of upper bounds {upper.sum():.4g}")
    return lower, upper


@dataclass
class DualRound:
    D: np.ndarray
    s: float
    alpha: np.ndarray


def solve_edge(mm, lower=None, upper=None):
    sol = solve_or_raise(edge_lp(mm, lower, upper), "dual weight LP")
    T = mm.n_components
    alpha = np.clip(-sol.duals[:T], 0.0, None)
    D = np.clip(sol.x[:mm.n], 0.0, None)
    return DualRound(D / D.sum(), float(sol.x[-1]), simplex_normalize(alpha))


def _column_generation(ds, learner, cfg, lower, upper, name, final_weights=None):
    """Train a component on ``D_t``, re-solve the dual, repeat.

    Stops once a new component's edge ``sum_i D_t(i) m_i`` no longer exceeds the
    previous dual value by more than ``cfg.tol``, or when the weak learner falls
    to chance level.
    """
    n, C = ds.n, ds.n_classes
    chance = 1.0 - 1.0 / C
    D = uniform_weights(n)
    comps, rounds, log = [], [], []
    last = None
    for t in range(1, cfg.T + 1):
        h = learner.train(ds, D)
        eps = weighted_error(h, ds, D)
        col = margin_matrix([h], ds, training=True).m[:, 0]
        edge = float(D @ col)
        entry = {"round": t, "epsilon": eps, "edge": edge}
        if eps >= chance and comps:
            entry["stopped"] = "weak learner at chance level"
            log.append(entry)
            break
        if last is not None and edge <= last.s + cfg.tol:
            entry["stopped"] = "no violated column"
            log.append(entry)
            break
        comps.append(h)
        mm = margin_matrix(comps, ds, training=True)
        last = solve_edge(mm, lower, upper)
        rounds.append(last)
        entry["s"] = last.s
        log.append(entry)
        D = last.D
    mm = margin_matrix(comps, ds, training=True)
    alpha = last.alpha if final_weights is None else final_weights(mm)
    info = {"algorithm": name, "rounds": log, "n_components": len(comps), **cfg.params()}
    ens = Ensemble(comps, simplex_normalize(alpha), C, ds.label_names, info=info)
    ens.rounds = rounds
    return ens


def dual_lp_adaboost_train(ds, learner, cfg=LpVariantConfig()):
    """Column generation on the hard-margin dual; final weights from the hard-margin primal."""
    return _column_generation(ds, learner, cfg, None, None, "dual_lpadaboost",
                              final_weights=lambda mm: lp_adaboost_weights(mm)[0])


def dual_lpu_boost_train(ds, learner, cfg=LpVariantConfig(beta=2.0, d_lb=50.0)):
    """Column generation with capped (and optionally floored) instance weights.

    ``beta == 1`` with ``d_lb=None`` is plain soft-margin column generation.
    """
    if ds.n_classes != 2:
        raise ValueError("uneven-cost boosting is defined for two classes only")
    lower, upper = uneven_bounds(ds.y, cfg)
    name = "dual_lpboost" if cfg.beta == 1 and cfg.d_lb is None else "dual_lpuboost"
    return _column_generation(ds, learner, cfg, lower, upper, name)


def dual_lp_boost_train(ds, learner, cfg=LpVariantConfig()):
    """Soft-margin column generation: every weight capped at ``1 / (nu * n)``; any class count."""
    if cfg.beta != 1 or cfg.d_lb is not None:
        warnings.warn("dual_lp_boost_train ignores beta and d_lb")
    upper = np.full(ds.n, cfg.cost(ds.n))
    return _column_generation(ds, learner, cfg, None, upper, "dual_lpboost")
