"""Linear programs and a dense bounded-variable revised simplex.

An :class:`LpModel` minimizes ``c.x + c0`` subject to ``A x (sense) b`` and
``lower <= x <= upper``.  Rows are turned into equalities with one slack each
(``A x + s = b`` where ``s >= 0`` for ``<=``, ``s <= 0`` for ``>=`` and
``s = 0`` for ``==``), and the simplex keeps every nonbasic column at one of
its bounds (or at zero when it is free).

Backends are plain callables ``LpModel -> LpResult`` registered by name, so
branch-and-bound never depends on which engine solves the node relaxations.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from ..errors import ParameterError, SolverError
from ..model import AffineExpr, LinearRow, Sense

log = logging.getLogger(__name__)

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
BLAND_AFTER = 1000
REFACTOR_EVERY = 50  # iterations between recomputations of the basic values
ROW_CHECK_TOL = 1e-7


@dataclass(frozen=True)
class LpModel:
    """Dense LP data; ``senses`` holds -1 for ``<=``, 0 for ``==``, +1 for ``>=``."""

    c: np.ndarray
    A: np.ndarray
    senses: np.ndarray
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    c0: float = 0.0
    minimize: bool = True

    def __post_init__(self) -> None:
        n = len(self.c)
        m = len(self.b)
        if self.A.shape != (m, n):
            raise ParameterError(f"A has shape {self.A.shape}, expected {(m, n)}")
        if len(self.senses) != m or len(self.lower) != n or len(self.upper) != n:
            raise ParameterError("inconsistent LP dimensions")
        if np.any(self.lower > self.upper):
            j = int(np.argmax(self.lower > self.upper))
            raise ParameterError(f"column {j}: lower {self.lower[j]} > upper {self.upper[j]}")

    @property
    def n_cols(self) -> int:
        return len(self.c)

    @property
    def n_rows(self) -> int:
        return len(self.b)

    @classmethod
    def from_rows(cls, n: int, rows: Sequence[LinearRow], objective: AffineExpr,
                  bounds: Sequence[tuple[float, float]], minimize: bool = True) -> "LpModel":
        c = np.zeros(n)
        for k, v in objective.terms:
            c[k] = v
        A = np.zeros((len(rows), n))
        b = np.zeros(len(rows))
        senses = np.zeros(len(rows))
        for i, row in enumerate(rows):
            for k, v in row.expr.terms:
                A[i, k] = v
            b[i] = row.rhs - row.expr.constant
            senses[i] = {Sense.LE: -1.0, Sense.EQ: 0.0, Sense.GE: 1.0}[row.sense]
        lo = np.array([bd[0] for bd in bounds], dtype=float)
        hi = np.array([bd[1] for bd in bounds], dtype=float)
        return cls(c, A, senses, b, lo, hi, objective.constant, minimize)

    def with_bounds(self, lower: np.ndarray, upper: np.ndarray) -> "LpModel":
        return replace(self, lower=np.asarray(lower, float), upper=np.asarray(upper, float))

    def with_rows(self, A: np.ndarray, senses: np.ndarray, b: np.ndarray) -> "LpModel":
        """Append rows given densely."""
        if len(b) == 0:
            return self
        return replace(self, A=np.vstack([self.A, A]), senses=np.concatenate([self.senses, senses]),
                       b=np.concatenate([self.b, b]))

    def objective_value(self, x: np.ndarray) -> float:
        return float(self.c @ x) + self.c0

    def max_row_violation(self, x: np.ndarray) -> float:
        if self.n_rows == 0:
            return 0.0
        r = self.A @ x - self.b
        viol = np.where(self.senses < 0, r, np.where(self.senses > 0, -r, np.abs(r)))
        return float(max(0.0, viol.max()))


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: Optional[np.ndarray]
    objective: float
    duals: Optional[np.ndarray] = None
    iterations: int = 0


# ---------------------------------------------------------------------------
# Built-in simplex


class _Simplex:
    """One bounded-variable primal simplex run.

    Columns are the structurals, one slack per row and the phase-one
    artificials; slacks and artificials are signed unit columns.  A basis
    holding the unit columns of the rows ``R2`` and the structurals ``S`` is
    nonsingular exactly when the working block ``A[R1, S]`` is, where ``R1``
    are the remaining rows.  Only that block is factorized, so the cost of an
    iteration grows with the number of structural columns rather than with
    the number of rows, which suits cut-heavy LPs.
    """

    def __init__(self, lp: LpModel):
        self.m, self.n = lp.n_rows, lp.n_cols
        m, n = self.m, self.n
        self.A = lp.A
        self.b = lp.b.astype(float)
        sign = -1.0 if not lp.minimize else 1.0
        slack_lo = np.where(lp.senses > 0, -np.inf, 0.0)
        slack_hi = np.where(lp.senses < 0, np.inf, 0.0)
        lo = np.concatenate([lp.lower, slack_lo])
        hi = np.concatenate([lp.upper, slack_hi])
        # Nonbasic starting values: lower bound if finite, else upper, else zero.
        x = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
        x[n:] = 0.0
        resid = self.b - self.A @ x[:n] if m else np.zeros(0)
        basis, art_rows, art_signs, art_vals = [], [], [], []
        for i in range(m):
            r = resid[i]
            if slack_lo[i] - FEAS_TOL <= r <= slack_hi[i] + FEAS_TOL:
                basis.append(n + i)
                x[n + i] = min(max(r, slack_lo[i]), slack_hi[i])
            else:
                basis.append(n + m + len(art_rows))
                art_rows.append(i)
                art_signs.append(1.0 if r > 0 else -1.0)
                art_vals.append(abs(r))
        k = len(art_rows)
        self.n_art = k
        self.x = np.concatenate([x, np.array(art_vals, dtype=float)])
        self.lo = np.concatenate([lo, np.zeros(k)])
        self.hi = np.concatenate([hi, np.full(k, np.inf)])
        self.cost = np.concatenate([sign * lp.c, np.zeros(m + k)])
        self.unit_row = np.concatenate([np.full(n, -1), np.arange(m), np.array(art_rows, dtype=int)])
        self.unit_sign = np.concatenate([np.zeros(n), np.ones(m), np.array(art_signs, dtype=float)])
        self.basis = np.array(basis, dtype=int)
        self.is_basic = np.zeros(n + m + k, dtype=bool)
        self.is_basic[self.basis] = True
        self.iterations = 0
        self.factor()
        self.recompute_basics()

    # -- linear algebra on the working block --------------------------------

    def factor(self) -> None:
        structural = self.basis < self.n
        self.s_pos = np.flatnonzero(structural)
        self.u_pos = np.flatnonzero(~structural)
        self.S = self.basis[self.s_pos]
        U = self.basis[self.u_pos]
        self.R2 = self.unit_row[U]
        self.sig_u = self.unit_sign[U]
        covered = np.zeros(self.m, dtype=bool)
        covered[self.R2] = True
        self.R1 = np.flatnonzero(~covered)
        if len(self.R1) != len(self.S):
            raise SolverError("basis with duplicated unit columns")
        self.A_r2s = self.A[np.ix_(self.R2, self.S)]
        self.lu = None
        if len(self.S):
            K = self.A[np.ix_(self.R1, self.S)]
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", LinAlgWarning)
                lu, piv = lu_factor(K, check_finite=False)
            diag = np.abs(np.diag(lu))
            if diag.min() <= 1e-13 * max(1.0, diag.max()):
                raise SolverError("singular working basis")
            self.lu = (lu, piv)

    def ftran(self, a: np.ndarray) -> np.ndarray:
        """B^-1 a, ordered by basis position."""
        w = np.empty(self.m)
        ws = lu_solve(self.lu, a[self.R1], check_finite=False) if self.lu is not None else np.zeros(0)
        w[self.s_pos] = ws
        w[self.u_pos] = self.sig_u * (a[self.R2] - self.A_r2s @ ws)
        return w

    def btran(self, cb_s: np.ndarray, cb_u: np.ndarray) -> np.ndarray:
        """Row prices y with y B = c_B."""
        y = np.empty(self.m)
        y_r2 = self.sig_u * cb_u
        y[self.R2] = y_r2
        if self.lu is not None:
            y[self.R1] = lu_solve(self.lu, cb_s - self.A_r2s.T @ y_r2, trans=1, check_finite=False)
        return y

    def column(self, j: int) -> np.ndarray:
        if j < self.n:
            return self.A[:, j]
        a = np.zeros(self.m)
        a[self.unit_row[j]] = self.unit_sign[j]
        return a

    def recompute_basics(self) -> None:
        if self.m == 0:
            return
        nb = ~self.is_basic
        rhs = self.b - self.A @ np.where(nb[: self.n], self.x[: self.n], 0.0)
        units = np.flatnonzero(nb[self.n:]) + self.n
        np.subtract.at(rhs, self.unit_row[units], self.unit_sign[units] * self.x[units])
        self.x[self.basis] = self.ftran(rhs)

    def prices(self, cost: np.ndarray) -> np.ndarray:
        return self.btran(cost[self.S], cost[self.basis[self.u_pos]]) if self.m else np.zeros(0)

    # -- iterations ------------------------------------------------------------

    def run(self, cost: np.ndarray, max_iter: int) -> str:
        """Optimize ``cost`` from the current basic feasible solution."""
        degenerate = 0
        since_refresh = 0
        fixed = self.hi - self.lo <= FEAS_TOL
        while True:
            if self.iterations >= max_iter:
                raise SolverError(f"simplex iteration limit {max_iter} reached")
            y = self.prices(cost)
            d = cost.copy()
            if self.m:
                d[: self.n] -= self.A.T @ y
                d[self.n:] -= self.unit_sign[self.n:] * y[self.unit_row[self.n:]]
            at_lo = np.isfinite(self.lo) & (np.abs(self.x - self.lo) <= FEAS_TOL)
            at_hi = np.isfinite(self.hi) & (np.abs(self.x - self.hi) <= FEAS_TOL)
            can_up = ~self.is_basic & ~fixed & ~at_hi & (d < -OPT_TOL)
            can_down = ~self.is_basic & ~fixed & ~at_lo & (d > OPT_TOL)
            eligible = can_up | can_down
            if not eligible.any():
                return "optimal"
            bland = degenerate >= BLAND_AFTER
            if bland:
                j = int(np.flatnonzero(eligible)[0])
            else:
                j = int(np.argmax(np.where(eligible, np.abs(d), -1.0)))
            direction = 1.0 if can_up[j] else -1.0
            w = self.ftran(self.column(j)) if self.m else np.zeros(0)
            step, leave, leave_to_hi = self._ratio_test(direction * w, bland)
            if self.hi[j] - self.lo[j] <= step:
                step, leave = self.hi[j] - self.lo[j], -1
            if not math.isfinite(step):
                return "unbounded"
            self.iterations += 1
            degenerate = degenerate + 1 if step <= FEAS_TOL else 0
            if self.m:
                self.x[self.basis] -= direction * step * w
            self.x[j] += direction * step
            if leave < 0:
                # Bound flip: the entering column moves to its opposite bound.
                self.x[j] = self.hi[j] if direction > 0 else self.lo[j]
                continue
            out = self.basis[leave]
            self.x[out] = self.hi[out] if leave_to_hi else self.lo[out]
            self.basis[leave] = j
            self.is_basic[out], self.is_basic[j] = False, True
            self.factor()
            since_refresh += 1
            if since_refresh >= REFACTOR_EVERY:
                self.recompute_basics()
                since_refresh = 0

    def _ratio_test(self, rate: np.ndarray, bland: bool) -> tuple[float, int, bool]:
        """Harris two-pass ratio test: the longest step that keeps the basics within
        bounds up to FEAS_TOL, then the largest pivot among rows blocking before it."""
        if self.m == 0:
            return math.inf, -1, False
        xb = self.x[self.basis]
        lob, hib = self.lo[self.basis], self.hi[self.basis]
        dec, inc = rate > PIVOT_TOL, rate < -PIVOT_TOL
        exact = np.full(self.m, math.inf)
        relaxed = np.full(self.m, math.inf)
        with np.errstate(invalid="ignore", over="ignore"):
            exact[dec] = (xb[dec] - lob[dec]) / rate[dec]
            exact[inc] = (hib[inc] - xb[inc]) / -rate[inc]
            relaxed[dec] = (xb[dec] - lob[dec] + FEAS_TOL) / rate[dec]
            relaxed[inc] = (hib[inc] - xb[inc] + FEAS_TOL) / -rate[inc]
        exact = np.maximum(np.nan_to_num(exact, nan=math.inf, posinf=math.inf), 0.0)
        relaxed = np.nan_to_num(relaxed, nan=math.inf, posinf=math.inf)
        if bland:
            step = float(exact.min())
            if not math.isfinite(step):
                return math.inf, -1, False
            ties = np.flatnonzero(exact <= step + 1e-12 * (1.0 + step))
            leave = int(ties[np.argmin(self.basis[ties])])
            return step, leave, bool(inc[leave])
        bound = max(0.0, float(relaxed.min()))
        if not math.isfinite(bound):
            return math.inf, -1, False
        cands = np.flatnonzero(exact <= bound)
        leave = int(cands[np.argmax(np.abs(rate[cands]))])
        return float(exact[leave]), leave, bool(inc[leave])


def simplex(lp: LpModel, max_iter: int = 50000) -> LpResult:
    """Two-phase bounded-variable primal simplex (Dantzig pricing, Bland fallback)."""
    if not np.all(np.isfinite(lp.A)) or not np.all(np.isfinite(lp.b)) or not np.all(np.isfinite(lp.c)):
        raise SolverError("LP data contains non-finite entries")
    sx = _Simplex(lp)
    n, m, k = sx.n, sx.m, sx.n_art
    scale = 1.0 + float(np.abs(lp.b).max(initial=0.0))
    if k:
        phase1 = np.zeros(n + m + k)
        phase1[n + m:] = 1.0
        status = sx.run(phase1, max_iter)
        sx.recompute_basics()
        infeas = float(sx.x[n + m:].sum())
        if status != "optimal" or infeas > 1e-8 * scale:
            return LpResult("infeasible", None, math.nan, iterations=sx.iterations)
        sx.hi[n + m:] = 0.0
        sx.x[n + m:] = 0.0
        sx.recompute_basics()
    status = sx.run(sx.cost, max_iter)
    if status == "unbounded":
        return LpResult("unbounded", None, -math.inf if lp.minimize else math.inf,
                        iterations=sx.iterations)
    sx.recompute_basics()
    x = np.clip(sx.x[:n], lp.lower, lp.upper)
    viol = lp.max_row_violation(x)
    if viol > ROW_CHECK_TOL * scale:
        raise SolverError(f"simplex finished with row violation {viol:.3g}")
    duals = sx.prices(sx.cost)
    if not lp.minimize:
        duals = -duals
    return LpResult("optimal", x, lp.objective_value(x), duals, sx.iterations)


# ---------------------------------------------------------------------------
# HiGHS through scipy


def highs(lp: LpModel) -> LpResult:
    """Solve with scipy's HiGHS interface (used as an alternative engine and test oracle)."""
    from scipy.optimize import linprog

    c = lp.c if lp.minimize else -lp.c
    le = lp.senses < 0
    ge = lp.senses > 0
    eq = lp.senses == 0
    A_ub = np.vstack([lp.A[le], -lp.A[ge]]) if (le.any() or ge.any()) else None
    b_ub = np.concatenate([lp.b[le], -lp.b[ge]]) if A_ub is not None else None
    A_eq = lp.A[eq] if eq.any() else None
    b_eq = lp.b[eq] if eq.any() else None
    bounds = [(None if not math.isfinite(lo) else lo, None if not math.isfinite(hi) else hi)
              for lo, hi in zip(lp.lower, lp.upper)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs",
                  options={"primal_feasibility_tolerance": FEAS_TOL, "dual_feasibility_tolerance": OPT_TOL})
    if res.status == 2:
        return LpResult("infeasible", None, math.nan)
    if res.status == 3:
        return LpResult("unbounded", None, -math.inf if lp.minimize else math.inf)
    if res.status != 0:
        raise SolverError(f"HiGHS failed: {res.message}")
    x = np.asarray(res.x, dtype=float)
    return LpResult("optimal", x, lp.objective_value(x), iterations=int(res.nit))


# ---------------------------------------------------------------------------
# Backend registry

LpBackend = Callable[[LpModel], LpResult]
_BACKENDS: dict[str, LpBackend] = {"simplex": simplex, "highs": highs}


def register_backend(name: str, backend: LpBackend) -> None:
    _BACKENDS[name] = backend


def get_backend(name: str | LpBackend) -> LpBackend:
    if callable(name):
        return name
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ParameterError(f"unknown LP backend {name!r}; known: {sorted(_BACKENDS)}") from None


def solve_lp(model: LpModel, backend: str | LpBackend = "simplex") -> LpResult:
    return get_backend(backend)(model)
