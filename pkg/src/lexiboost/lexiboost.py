"""Two-stage lexicographic choice of component weights.

Stage one finds, for every class separately, the smallest average hinge loss
any convex combination of the components can reach on that class. Stage two
picks the single combination whose worst per-class excess over those minima
is smallest.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .ensemble import (Ensemble, boost, class_average_losses, hinge_loss, margin_matrix,
                       margins, simplex_normalize)
from .lp import LinearProgram, solve_or_raise


@dataclass
class ClassStageOne:
    alpha: np.ndarray
    lam: np.ndarray
    loss: float  # L*_j: minimum attainable average hinge loss for the class


@dataclass
class StageOneResult:
    per_class: list

    @property
    def losses(self):
        return np.array([c.loss for c in self.per_class])

    def to_dict(self):
        return {"L_star": self.losses.tolist(),
                "alpha_per_class": [c.alpha.tolist() for c in self.per_class]}


@dataclass
class StageTwoResult:
    alpha: np.ndarray
    chi: float
    achieved: np.ndarray
    lam: np.ndarray
    costs: np.ndarray

    def to_dict(self):
        return {"alpha": self.alpha.tolist(), "chi": self.chi,
                "achieved_losses": self.achieved.tolist(), "costs": self.costs.tolist()}


def stage1_lp(mm, j):
    """min (1/n_j) sum lambda  s.t.  1 - m_i.alpha <= lambda_i (i in class j), alpha on the simplex."""
    idx = mm.class_indices[j]
    nj, T = idx.size, mm.n_components
    if nj == 0:
        raise ValueError(f"class {j} has no rows")
    c = np.concatenate([np.zeros(T), np.full(nj, 1.0 / nj)])
    A = np.zeros((nj + 1, T + nj))
    A[:nj, :T] = -mm.m[idx]
    A[:nj, T:] = -np.eye(nj)
    A[nj, :T] = 1.0
    b = np.concatenate([-np.ones(nj), [1.0]])
    return LinearProgram(c, A, b, ["<="] * nj + ["="])


def solve_stage1(mm, j):
    sol = solve_or_raise(stage1_lp(mm, j), f"stage-1 LP for class {j}")
    T = mm.n_components
    return ClassStageOne(sol.x[:T], sol.x[T:], float(sol.objective))


def solve_stage1_all(mm):
    return StageOneResult([solve_stage1(mm, j) for j in range(mm.n_classes)])


def stage2_lp(mm, reference_losses, costs=None):
    """min chi s.t. (c_j/n_j) sum_{i in j} lambda_i - c_j L*_j <= chi, hinge rows, simplex alpha."""
    n, T, C = mm.n, mm.n_components, mm.n_classes
    costs = np.ones(C) if costs is None else np.asarray(costs, dtype=float)
    counts = mm.class_counts
    nv = T + n + 1
    c = np.zeros(nv)
    c[-1] = 1.0
    A = np.zeros((C + n + 1, nv))
    b = np.zeros(C + n + 1)
    for j, idx in enumerate(mm.class_indices):
        A[j, T + idx] = costs[j] / counts[j]
        A[j, -1] = -1.0
        b[j] = costs[j] * reference_losses[j]
    A[C:C + n, :T] = -mm.m
    A[C:C + n, T:T + n] = -np.eye(n)
    b[C:C + n] = -1.0
    A[-1, :T] = 1.0
    b[-1] = 1.0
    return LinearProgram(c, A, b, ["<="] * (C + n) + ["="])


def solve_stage2(mm, stage1, costs=None):
    """Minimise the largest (cost-scaled) excess of a class's average loss over its stage-one minimum.

    ``stage1`` may be a :class:`StageOneResult` or a plain vector of per-class
    reference losses. The returned ``lam`` is the tight hinge loss under the
    optimal weights, which is itself an optimal point of the stage-two LP.
    """
    ref = stage1.losses if isinstance(stage1, StageOneResult) else np.asarray(stage1, float)
    costs = np.ones(mm.n_classes) if costs is None else np.asarray(costs, dtype=float)
    if np.any(costs <= 0):
        raise ValueError("class costs must be positive")
    sol = solve_or_raise(stage2_lp(mm, ref, costs), "stage-2 LP")
    T = mm.n_components
    alpha = sol.x[:T]
    lam = hinge_loss(margins(alpha, mm))
    return StageTwoResult(alpha, float(sol.objective), class_average_losses(alpha, mm),
                          lam, costs)


def lexicographic_weights(mm, costs=None):
    s1 = solve_stage1_all(mm)
    return s1, solve_stage2(mm, s1, costs)


def train_lexiboost(ds, learner, T=10, costs=None, normalize=True):
    """Boost ``T`` components, then re-weight them with the two-stage LP."""
    run = boost(ds, learner, T)
    info = {"adaboost_errors": run.errors, "n_components": len(run.components)}
    if len(run.components) < 2:
        warnings.warn("boosting produced a single component; LP re-weighting is moot")
    mm = margin_matrix(run.components, ds, training=True, normalize=normalize)
    s1, s2 = lexicographic_weights(mm, costs)
    info.update(stage1=s1.to_dict(), stage2=s2.to_dict())
    return Ensemble(run.components, simplex_normalize(s2.alpha), ds.n_classes,
                    ds.label_names, info=info)
