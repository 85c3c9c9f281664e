"""Dense two-phase bounded-variable simplex.

Every weight-selection problem in the package is phrased as a
:class:`LinearProgram` and handed to :func:`solve`. The solver keeps a full
tableau ``B^-1 A`` and treats finite variable bounds implicitly, so box
constraints on instance weights never turn into extra rows.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
OBJ_TOL = 1e-6

_DUAL_TOL = 1e-9
_BLAND_AFTER = 50  # consecutive degenerate pivots before switching to Bland's rule
_REFACTOR_EVERY = 100


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


class SolverError(RuntimeError):
    """An LP that should have an optimum did not reach one."""

    def __init__(self, status, what=""):
        self.status = status
        super().__init__(f"{what or 'LP'} finished with status {status.value}")


@dataclass
class LinearProgram:
    """``min``/``max`` of ``c @ x`` subject to ``A x (rel) b`` and ``lower <= x <= upper``.

    ``relations`` holds one of ``"<="``, ``">="``, ``"="`` per row. Bounds default
    to ``[0, inf)``.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    relations: list
    lower: np.ndarray = None
    upper: np.ndarray = None
    maximize: bool = False

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        nv = self.c.size
        self.A = np.asarray(self.A, dtype=float).reshape(-1, nv)
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.relations = list(self.relations)
        if self.lower is None:
            self.lower = np.zeros(nv)
        if self.upper is None:
            self.upper = np.full(nv, np.inf)
        self.lower = np.broadcast_to(np.asarray(self.lower, dtype=float), (nv,)).copy()
        self.upper = np.broadcast_to(np.asarray(self.upper, dtype=float), (nv,)).copy()
        if self.A.shape[0] != self.b.size or len(self.relations) != self.b.size:
            raise ValueError("row count mismatch between A, b and relations")
        bad = set(self.relations) - {"<=", ">=", "="}
        if bad:
            raise ValueError(f"unknown relations {sorted(bad)}")
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.A))
                and np.all(np.isfinite(self.b))):
            raise ValueError("LP coefficients must be finite")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise ValueError("invalid variable bounds")

    @property
    def n_vars(self):
        return self.c.size

    @property
    def n_rows(self):
        return self.b.size

    def dump(self):
        """Plain-text fixed-format rendering, for reproducing solver issues."""
        fmt = lambda v: repr(float(v) + 0.0)  # noqa: E731  (+0.0 folds -0.0 into 0.0)
        lines = [f"{'MAXIMIZE' if self.maximize else 'MINIMIZE'} {self.n_vars} {self.n_rows}",
                 "OBJ " + " ".join(fmt(v) for v in self.c)]
        for row, rel, rhs in zip(self.A, self.relations, self.b):
            lines.append("ROW " + " ".join(fmt(v) for v in row) + f" {rel} {fmt(rhs)}")
        for lo, hi in zip(self.lower, self.upper):
            lines.append(f"BOUND {fmt(lo)} {fmt(hi)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text):
        """Inverse of :meth:`dump`."""
        lines = [ln.split() for ln in text.strip().splitlines()]
        sense, nv, nr = lines[0][0], int(lines[0][1]), int(lines[0][2])
        c = [float(v) for v in lines[1][1:]]
        A, rel, b = [], [], []
        for ln in lines[2:2 + nr]:
            A.append([float(v) for v in ln[1:1 + nv]])
            rel.append(ln[1 + nv])
            b.append(float(ln[2 + nv]))
        bounds = [(float(ln[1]), float(ln[2])) for ln in lines[2 + nr:2 + nr + nv]]
        lo, hi = zip(*bounds) if bounds else ((), ())
        return cls(c, np.array(A).reshape(nr, nv), b, rel, np.array(lo), np.array(hi),
                   maximize=sense == "MAXIMIZE")


@dataclass
class LpSolution:
    status: Status
    x: np.ndarray = None
    objective: float = None
    # d(objective)/d(b_k) for each original row, in the LP's own sense.
    duals: np.ndarray = None
    iterations: int = 0
    info: dict = field(default_factory=dict)

    @property
    def optimal(self):
        return self.status is Status.OPTIMAL


def check_feasible(lp, x, tol=FEAS_TOL):
    """True iff ``x`` satisfies every row and bound of ``lp`` within ``tol``."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size != lp.n_vars:
        raise ValueError(f"point has {x.size} coordinates, LP has {lp.n_vars} variables")
    if np.any(x < lp.lower - tol) or np.any(x > lp.upper + tol):
        return False
    if lp.n_rows == 0:
        return True
    ax = lp.A @ x
    for val, rel, rhs in zip(ax, lp.relations, lp.b):
        if rel == "<=" and val > rhs + tol:
            return False
        if rel == ">=" and val < rhs - tol:
            return False
        if rel == "=" and abs(val - rhs) > tol:
            return False
    return True


class _Tableau:
    """Internal standard form: ``min c@z, M z = r, 0 <= z <= u`` with ``r >= 0``."""

    def __init__(self, lp):
        nv = lp.n_vars
        lo, hi = lp.lower, lp.upper
        # column map: original variable -> (internal column, sign), plus shift
        cols, signs, owner, ub = [], [], [], []
        shift = np.zeros(nv)
        for v in range(nv):
            if np.isfinite(lo[v]):
                shift[v] = lo[v]
                cols.append(lp.A[:, v]); signs.append(1.0); owner.append(v)
                ub.append(hi[v] - lo[v])
            elif np.isfinite(hi[v]):
                shift[v] = hi[v]
                cols.append(-lp.A[:, v]); signs.append(-1.0); owner.append(v)
                ub.append(np.inf)
            else:
                cols.append(lp.A[:, v]); signs.append(1.0); owner.append(v)
                ub.append(np.inf)
                cols.append(-lp.A[:, v]); signs.append(-1.0); owner.append(v)
                ub.append(np.inf)
        m = lp.n_rows
        self.m = m
        self.owner = np.array(owner, dtype=int)
        self.signs = np.array(signs)
        self.shift = shift
        n_struct = len(cols)
        struct = np.column_stack(cols) if cols else np.zeros((m, 0))
        cost = np.array([lp.c[o] * s for o, s in zip(owner, signs)])
        if lp.maximize:
            cost = -cost
        rhs = lp.b - lp.A @ shift if m else np.zeros(0)

        slack_cols, slack_rows, slack_sign = [], [], []
        for k, rel in enumerate(lp.relations):
            if rel == "<=":
                slack_rows.append(k); slack_sign.append(1.0)
            elif rel == ">=":
                slack_rows.append(k); slack_sign.append(-1.0)
        n_slack = len(slack_rows)
        slack = np.zeros((m, n_slack))
        for s, (k, sg) in enumerate(zip(slack_rows, slack_sign)):
            slack[k, s] = sg

        row_sign = np.where(rhs < 0, -1.0, 1.0)
        body = np.hstack([struct, slack]) * row_sign[:, None]
        rhs = rhs * row_sign

        # a unit column per row forms the starting basis: a +1 slack if there is one
        init_basis = np.full(m, -1, dtype=int)
        for s, k in enumerate(slack_rows):
            if body[k, n_struct + s] > 0:
                init_basis[k] = n_struct + s
        art_rows = np.flatnonzero(init_basis < 0)
        art = np.zeros((m, art_rows.size))
        art[art_rows, np.arange(art_rows.size)] = 1.0
        n_body = n_struct + n_slack
        init_basis[art_rows] = n_body + np.arange(art_rows.size)

        self.M = np.hstack([body, art])
        self.r = rhs
        self.n_struct = n_struct
        self.n_body = n_body
        self.n = self.M.shape[1]
        self.cost = np.concatenate([cost, np.zeros(self.n - n_struct)])
        self.ub = np.concatenate([np.array(ub, dtype=float), np.full(self.n - n_struct, np.inf)])
        self.art = np.arange(n_body, self.n)
        self.row_sign = row_sign
        self.init_basis = init_basis
        self.basis = init_basis.copy()
        self.at_upper = np.zeros(self.n, dtype=bool)
        self.T = self.M.copy()
        self.xB = self.r.copy()
        self.iterations = 0

    # -- linear algebra -------------------------------------------------
    def refactor(self):
        if self.m == 0:
            return
        B = self.M[:, self.basis]
        try:
            self.T = np.linalg.solve(B, self.M)
        except np.linalg.LinAlgError:
            return
        self.recompute_x()

    def nonbasic_values(self):
        z = np.where(self.at_upper, self.ub, 0.0)
        z[self.basis] = 0.0
        return z

    def recompute_x(self):
        if self.m == 0:
            return
        binv = self.T[:, self.init_basis]
        z = self.nonbasic_values()
        self.xB = binv @ (self.r - self.M @ z)

    def full_point(self):
        z = self.nonbasic_values()
        z[self.basis] = self.xB
        return z

    # -- simplex --------------------------------------------------------
    def run(self, cost, max_iter):
        """Primal simplex on ``cost`` from the current basis. Returns a Status."""
        d = cost - cost[self.basis] @ self.T if self.m else cost.copy()
        fixed = self.ub <= PIVOT_TOL
        degenerate = 0
        since_refactor = 0
        while True:
            if self.iterations >= max_iter:
                return Status.ITERATION_LIMIT
            nb = np.ones(self.n, dtype=bool)
            nb[self.basis] = False
            nb &= ~fixed
            gain = np.where(self.at_upper, d, -d)
            eligible = nb & (gain > _DUAL_TOL)
            if not eligible.any():
                return Status.OPTIMAL
            if degenerate >= _BLAND_AFTER:
                q = int(np.flatnonzero(eligible)[0])
            else:
                g = np.where(eligible, gain, -np.inf)
                q = int(np.argmax(g))
            direction = -1.0 if self.at_upper[q] else 1.0
            col = self.T[:, q] * direction

            theta = self.ub[q]
            leave = -1
            leave_to_upper = False
            if self.m:
                dec = col > PIVOT_TOL
                inc = col < -PIVOT_TOL
                ratios = np.full(self.m, np.inf)
                ratios[dec] = np.maximum(self.xB[dec], 0.0) / col[dec]
                ubB = self.ub[self.basis]
                up = inc & np.isfinite(ubB)
                ratios[up] = np.maximum(ubB[up] - self.xB[up], 0.0) / -col[up]
                best = ratios.min()
                if best < theta or (np.isinf(theta) and np.isfinite(best)):
                    ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, best))
                    r = ties[np.argmin(self.basis[ties])]
                    theta = ratios[r]
                    leave = int(r)
                    leave_to_upper = bool(col[r] < 0)
            if np.isinf(theta):
                return Status.UNBOUNDED

            self.iterations += 1
            degenerate = degenerate + 1 if theta <= 1e-12 else 0
            if self.m:
                self.xB -= theta * col
            if leave < 0:
                self.at_upper[q] = not self.at_upper[q]
                continue

            entering_val = (self.ub[q] if self.at_upper[q] else 0.0) + direction * theta
            out = self.basis[leave]
            self.at_upper[out] = leave_to_upper
            self.at_upper[q] = False
            self.basis[leave] = q
            self.xB[leave] = entering_val

            prow = self.T[leave] / self.T[leave, q]
            self.T -= np.outer(self.T[:, q], prow)
            self.T[leave] = prow
            d -= d[q] * prow
            since_refactor += 1
            if since_refactor >= _REFACTOR_EVERY:
                self.refactor()
                d = cost - cost[self.basis] @ self.T
                since_refactor = 0


def solve(lp, max_iter=None):
    """Solve ``lp`` with the two-phase bounded simplex.

    Returns an :class:`LpSolution`; ``x``, ``objective`` and ``duals`` are only
    populated when the status is optimal.
    """
    tab = _Tableau(lp)
    if max_iter is None:
        max_iter = 50 * (tab.m + tab.n) + 1000

    scale = 1.0 + (np.abs(tab.r).max() if tab.m else 0.0)
    if tab.art.size:
        phase1 = np.zeros(tab.n)
        phase1[tab.art] = 1.0
        status = tab.run(phase1, max_iter)
        if status is Status.ITERATION_LIMIT:
            return LpSolution(status, iterations=tab.iterations)
        tab.refactor()
        infeas = tab.full_point()[tab.art].sum()
        if infeas > FEAS_TOL * scale:
            return LpSolution(Status.INFEASIBLE, iterations=tab.iterations,
                              info={"phase1_residual": float(infeas)})
        tab.ub[tab.art] = 0.0
        basic_art = np.isin(tab.basis, tab.art)
        tab.xB[basic_art] = 0.0

    status = tab.run(tab.cost, max_iter)
    if status is not Status.OPTIMAL:
        return LpSolution(status, iterations=tab.iterations)
    tab.refactor()

    z = tab.full_point()
    x = tab.shift.copy()
    np.add.at(x, tab.owner, tab.signs * z[:tab.n_struct])
    x = np.clip(x, lp.lower, lp.upper)

    if tab.m:
        binv = tab.T[:, tab.init_basis]
        y = tab.cost[tab.basis] @ binv
        duals = y * tab.row_sign
        if lp.maximize:
            duals = -duals
    else:
        duals = np.zeros(0)
    return LpSolution(Status.OPTIMAL, x=x, objective=float(lp.c @ x), duals=duals,
                      iterations=tab.iterations)


def solve_or_raise(lp, what=""):
    sol = solve(lp)
    if not sol.optimal:
        raise SolverError(sol.status, what)
    return sol
