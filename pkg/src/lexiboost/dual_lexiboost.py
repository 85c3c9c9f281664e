"""Dual LPs that choose instance weights between boosting rounds.

The per-class programs and the min-max program both have a dual in which the
multipliers of the hinge rows behave like a distribution over instances. Adding
a sum-to-one row turns those multipliers into weights a weak learner can train
on; the resulting loops alternate training a component and re-solving.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .ensemble import Ensemble, margin_matrix, simplex_normalize
from .lexiboost import solve_stage1_all, solve_stage2
from .lp import LinearProgram, solve_or_raise
from .weak import weighted_error

BOUND_TOL = 1e-9


def initial_weights(y, n_classes):
    """``1 / (C * n_j)`` for every instance of class ``j``: each class carries equal mass."""
    counts = np.bincount(y, minlength=n_classes)
    return 1.0 / (n_classes * counts[y])


# -- LP builders --------------------------------------------------------------

def pprime_lp(mm, j, with_sum=True):
    """max sum_{i in j} D_i - s  s.t.  D . m_tau <= s for every column, 0 <= D_i <= 1/n_{class(i)}."""
    n, T = mm.n, mm.n_components
    counts = mm.class_counts
    c = np.zeros(n + 1)
    c[mm.class_indices[j]] = 1.0
    c[-1] = -1.0
    rows = [np.concatenate([mm.m[:, tau], [-1.0]]) for tau in range(T)]
    rel, b = ["<="] * T, [0.0] * T
    if with_sum:
        rows.append(np.concatenate([np.ones(n), [0.0]]))
        rel.append("=")
        b.append(1.0)
    upper = np.concatenate([1.0 / counts[mm.y], [np.inf]])
    lower = np.concatenate([np.zeros(n), [-np.inf]])
    return LinearProgram(c, np.array(rows), b, rel, lower, upper, maximize=True)


def stage1_dual_lp(mm, j):
    """Exact LP dual of the class-``j`` stage-one program (class-``j`` weights only, no sum row)."""
    idx = mm.class_indices[j]
    nj, T = idx.size, mm.n_components
    c = np.concatenate([np.ones(nj), [-1.0]])
    A = np.hstack([mm.m[idx].T, -np.ones((T, 1))])
    lower = np.concatenate([np.zeros(nj), [-np.inf]])
    upper = np.concatenate([np.full(nj, 1.0 / nj), [np.inf]])
    return LinearProgram(c, A, np.zeros(T), ["<="] * T, lower, upper, maximize=True)


def qprime_lp(mm, reference_losses, with_sum=True):
    """max sum D - sum_j d_j L*_j - s  s.t.  D . m_tau <= s, 0 <= D_i <= d_j/n_j, sum d <= 1.

    Variable order: ``D`` (n), ``d`` (C), ``s``.
    """
    n, T, C = mm.n, mm.n_components, mm.n_classes
    counts = mm.class_counts
    nv = n + C + 1
    c = np.concatenate([np.ones(n), -np.asarray(reference_losses, dtype=float), [-1.0]])
    rows, rel, b = [], [], []
    for tau in range(T):
        r = np.zeros(nv)
        r[:n] = mm.m[:, tau]
        r[-1] = -1.0
        rows.append(r); rel.append("<="); b.append(0.0)
    if with_sum:
        r = np.zeros(nv)
        r[:n] = 1.0
        rows.append(r); rel.append("="); b.append(1.0)
    cap = np.zeros((n, nv))
    cap[np.arange(n), np.arange(n)] = 1.0
    cap[np.arange(n), n + mm.y] = -1.0 / counts[mm.y]
    rows.extend(cap); rel.extend(["<="] * n); b.extend([0.0] * n)
    r = np.zeros(nv)
    r[n:n + C] = 1.0
    rows.append(r); rel.append("<="); b.append(1.0)
    lower = np.concatenate([np.zeros(n + C), [-np.inf]])
    return LinearProgram(c, np.array(rows), b, rel, lower, None, maximize=True)


@dataclass
class PPrimeSolution:
    D: np.ndarray
    s: float
    objective: float


@dataclass
class QPrimeSolution:
    D: np.ndarray
    d: np.ndarray
    s: float
    objective: float


def solve_pprime(mm, j):
    sol = solve_or_raise(pprime_lp(mm, j), f"P' LP for class {j}")
    return PPrimeSolution(sol.x[:mm.n], float(sol.x[-1]), float(sol.objective))


def solve_qprime(mm, reference_losses):
    sol = solve_or_raise(qprime_lp(mm, reference_losses), "Q' LP")
    n, C = mm.n, mm.n_classes
    return QPrimeSolution(sol.x[:n], sol.x[n:n + C], float(sol.x[-1]), float(sol.objective))


# -- weight bookkeeping -------------------------------------------------------

def _clean(D):
    D = np.clip(D, 0.0, None)
    return D / D.sum()


def assemble_class_weights(blocks, y, n_classes):
    """Take class ``j``'s entries from the class-``j`` solution and renormalise.

    A single global factor is used whenever it keeps every weight within its
    class cap ``1/n_j``. If the blocks carry too little mass for that, the
    shortfall is filled by raising uncapped classes proportionally (capped
    weights stay at ``1/n_j``), which keeps within-class ratios intact. Only when
    every populated class is already at its cap does leftover mass go to
    zero-weight points and then to whatever headroom remains.
    """
    counts = np.bincount(y, minlength=n_classes)
    caps = 1.0 / counts[y]
    D = np.zeros(y.size)
    for j in range(n_classes):
        idx = y == j
        D[idx] = np.clip(blocks[j][idx], 0.0, None)
    total = D.sum()
    if total <= 0:
        return initial_weights(y, n_classes), "reset"
    scaled = D / total
    if np.all(scaled <= caps + BOUND_TOL):
        return scaled, "global"
    # per-class factors: each class can grow at most until its largest weight hits the cap
    mass = np.array([D[y == j].sum() for j in range(n_classes)])
    limit = np.array([(1.0 / counts[j]) / D[y == j].max() if mass[j] > 0 else 0.0
                      for j in range(n_classes)])
    factor = _water_fill(mass, limit)
    out = D * factor[y]
    rest = 1.0 - out.sum()
    if rest > 1e-12:
        # every populated class is at its cap; zero-weight points take the rest first
        # (they carry no ratios to keep), then any remaining headroom
        for pool in (out <= 0, np.ones(y.size, bool)):
            room = np.where(pool, caps - out, 0.0)
            if room.sum() <= 0 or rest <= 1e-12:
                continue
            take = min(rest, room.sum())
            out += room * (take / room.sum())
            rest -= take
    return np.minimum(out / out.sum(), caps), "capped"


def _water_fill(mass, limit):
    """Common scale ``g`` (clipped per class at ``limit``) with ``sum min(g, limit) * mass = 1``."""
    factor = np.zeros(mass.size)
    active = mass > 0
    remaining = 1.0
    while active.any():
        g = remaining / mass[active].sum()
        over = active & (limit < g)
        if not over.any():
            factor[active] = g
            break
        factor[over] = limit[over]
        remaining -= (limit[over] * mass[over]).sum()
        active &= ~over
    return factor


def check_distribution(D, y, upper, tol=BOUND_TOL):
    """Sum-to-one and ``0 <= D_i <= upper_i`` within ``tol``."""
    return (abs(D.sum() - 1.0) <= tol and np.all(D >= -tol)
            and np.all(D <= np.asarray(upper) + tol))


# -- training loop --------------------------------------------------------------

@dataclass
class DualTrace:
    """Per-round audit record of the weights chosen by the dual LPs."""

    phase_a: list = field(default_factory=list)
    phase_c: list = field(default_factory=list)
    distributions: list = field(default_factory=list)  # (phase, D, upper bounds)

    def to_dict(self):
        return {"phase_a": self.phase_a, "phase_c": self.phase_c}


def _summary(D):
    p = D[D > 0]
    return {"min": float(D.min()), "max": float(D.max()),
            "entropy": float(-(p * np.log(p)).sum())}


def _run_phase(ds, learner, T, threshold, next_weights, trace_rows, trace, phase):
    C = ds.n_classes
    D = initial_weights(ds.y, C)
    caps = 1.0 / ds.class_counts[ds.y]
    trace.distributions.append((phase, D.copy(), caps))
    comps = []
    first_failed = None
    for t in range(1, T + 1):
        h = learner.train(ds, D)
        eps = weighted_error(h, ds, D)
        row = {"round": t, "epsilon": eps}
        if eps > threshold:
            row["stopped"] = True
            trace_rows.append(row)
            if not comps:
                first_failed = h
            break
        comps.append(h)
        if t < T:
            mm = margin_matrix(comps, ds, training=True, normalize=learner_normalize(learner))
            D, upper, extra = next_weights(mm)
            trace.distributions.append((phase, D.copy(), upper))
            row.update(extra, weights=_summary(D))
        trace_rows.append(row)
    if not comps:
        warnings.warn(f"{phase}: first component already exceeds the error threshold; "
                      "keeping it as a single component")
        comps = [first_failed]
    return comps


def learner_normalize(learner):
    return getattr(learner, "normalize_margins", True)


def train_dual_lexiboost(ds, learner, T=10, threshold=None):
    """Dual-weight boosting followed by the primal two-stage weight selection.

    Phase A trains components on weights from the per-class dual LPs; their
    stage-one losses become the references for phase C, which trains a fresh
    set of components on weights from the min-max dual LP. Final weights come
    from the stage-two LP on the phase-C components.

    ``threshold`` is the weighted error above which a round stops the loop;
    it defaults to ``1 / n_classes``.
    """
    C = ds.n_classes
    threshold = 1.0 / C if threshold is None else threshold
    trace = DualTrace()
    caps = 1.0 / ds.class_counts[ds.y]

    def from_pprime(mm):
        sols = [solve_pprime(mm, j) for j in range(C)]
        D, how = assemble_class_weights([s.D for s in sols], ds.y, C)
        return D, caps, {"s": [s.s for s in sols], "assembly": how}

    comps_a = _run_phase(ds, learner, T, threshold, from_pprime, trace.phase_a, trace, "A")
    mm_a = margin_matrix(comps_a, ds, training=True, normalize=learner_normalize(learner))
    stage1 = solve_stage1_all(mm_a)

    def from_qprime(mm):
        q = solve_qprime(mm, stage1.losses)
        D = _clean(q.D)
        upper = q.d[ds.y] / ds.class_counts[ds.y]
        return D, upper, {"s": q.s, "d": q.d.tolist()}

    comps_c = _run_phase(ds, learner, T, threshold, from_qprime, trace.phase_c, trace, "C")
    mm_c = margin_matrix(comps_c, ds, training=True, normalize=learner_normalize(learner))
    s2 = solve_stage2(mm_c, stage1)
    info = {"stage1": stage1.to_dict(), "stage2": s2.to_dict(), "trace": trace.to_dict(),
            "n_components_a": len(comps_a), "n_components": len(comps_c)}
    ens = Ensemble(comps_c, simplex_normalize(s2.alpha), C, ds.label_names, info=info)
    ens.trace = trace
    return ens
