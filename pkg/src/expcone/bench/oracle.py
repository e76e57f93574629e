"""Reference optima by enumeration, independent of every solver in the package.

:func:`brute_force_oracle` enumerates all binary assignments of a model whose
remaining continuous columns are cone epigraph variables: each such column
appears in exactly one cone entry, in no linear row, and with a positive
objective coefficient, so its optimal value follows in closed form from the
binary part (v = exp(c.x) for packing cones, v = y log y for covering cones).

:func:`slr_support_oracle` enumerates the supports of size k of a sparse
logistic regression and minimizes the convex loss on each support by cyclic
golden-section coordinate descent.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import ParameterError, UnsupportedError
from ..model import Integrality, ModelIR, Sense

MAX_ASSIGNMENTS = 2 ** 20
CHUNK = 2 ** 14
ROW_TOL = 1e-9


@dataclass(frozen=True)
class OracleResult:
    objective: float
    assignment: Optional[tuple[float, ...]]

    @property
    def feasible(self) -> bool:
        return self.assignment is not None


@dataclass(frozen=True)
class _Epigraph:
    var: int
    cone: int
    slot: int  # 0 for e1, 2 for e3
    coef: float


def _epigraph_columns(model: ModelIR, free: Sequence[int]) -> dict[int, _Epigraph]:
    in_rows = {k for row in model.linear_rows for k in row.expr.variables}
    out = {}
    for j in free:
        if j in in_rows:
            raise UnsupportedError(f"continuous column {j} appears in a linear row")
        if model.objective.coef(j) <= 0.0:
            raise UnsupportedError(f"continuous column {j} needs a positive objective coefficient")
        hits = [(ci, slot) for ci, cone in enumerate(model.cones)
                for slot, e in enumerate(cone.exprs()) if j in e.variables]
        if len(hits) != 1 or hits[0][1] == 1:
            raise UnsupportedError(f"continuous column {j} is not a single cone epigraph entry")
        ci, slot = hits[0]
        e = model.cones[ci].exprs()[slot]
        coef = e.coef(j)
        if (slot == 0 and coef <= 0.0) or (slot == 2 and coef >= 0.0):
            raise UnsupportedError(f"column {j}: cone entry does not bound it from below")
        out[j] = _Epigraph(j, ci, slot, coef)
    for ci in range(len(model.cones)):
        if sum(1 for e in out.values() if e.cone == ci) > 1:
            raise UnsupportedError(f"cone {ci} holds more than one continuous column")
    return out


def _min_entry(x1: np.ndarray, x2: np.ndarray, x3: np.ndarray, slot: int) -> np.ndarray:
    """Smallest feasible value of the entry in ``slot`` given the other two (nan never)."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if slot == 0:
            # x1 >= x2 exp(x3 / x2); x2 = 0 needs x3 <= 0 and then x1 >= 0.
            pos = x2 * np.exp(x3 / np.where(x2 > 0, x2, 1.0))
            zero = np.where(x3 <= ROW_TOL, 0.0, np.inf)
            return np.where(x2 > 0, pos, np.where(x2 == 0, zero, np.inf))
        # slot 2: x3 <= x2 log(x1 / x2), with 0 log(x1/0) = 0 for x1 >= 0.
        safe1 = np.where(x1 > 0, x1, 1.0)
        safe2 = np.where(x2 > 0, x2, 1.0)
        pos = np.where(x1 > 0, x2 * (np.log(safe1) - np.log(safe2)), -np.inf)
        return np.where(x2 > 0, pos, np.where((x2 == 0) & (x1 >= 0), 0.0, -np.inf))


def brute_force_solve(model: ModelIR) -> OracleResult:
    """Exhaustive minimum over binary assignments with closed-form epigraph columns."""
    binaries, fixed, free = [], {}, []
    for v in model.variables:
        if v.lower == v.upper:
            fixed[v.id] = v.lower
        elif v.integrality is not Integrality.CONTINUOUS:
            if v.lower < 0.0 or v.upper > 1.0:
                raise UnsupportedError(f"integer column {v.id} is not binary")
            binaries.append(v.id)
        else:
            free.append(v.id)
    if 2 ** len(binaries) > MAX_ASSIGNMENTS:
        raise ParameterError(f"{2 ** len(binaries)} assignments exceed the limit {MAX_ASSIGNMENTS}")
    if model.lorentz_rows:
        raise UnsupportedError("the oracle evaluates exponential cones only")
    epi = _epigraph_columns(model, free)
    n = model.n_vars
    best, best_x = math.inf, None
    total = 2 ** len(binaries)
    bits = np.array(binaries, dtype=int)
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
        X = np.zeros((len(idx), n))
        for j, val in fixed.items():
            X[:, j] = val
        for pos, j in enumerate(bits):
            X[:, j] = (idx >> pos) & 1
        ok = np.ones(len(idx), dtype=bool)
        for row in model.linear_rows:
            lhs = _eval(row.expr, X) - row.rhs
            scale = 1.0 + abs(row.rhs)
            if row.sense is Sense.LE:
                ok &= lhs <= ROW_TOL * scale
            elif row.sense is Sense.GE:
                ok &= lhs >= -ROW_TOL * scale
            else:
                ok &= np.abs(lhs) <= ROW_TOL * scale
        if not ok.any():
            continue
        X = X[ok]
        for e in epi.values():
            cone = model.cones[e.cone]
            entries = [_eval(expr, X) for expr in cone.exprs()]
            # The column is still zero, so entries[slot] is the rest of that entry.
            # slot 0: rest + coef v >= target (coef > 0); slot 2: rest + coef v <= cap (coef < 0).
            val = (_min_entry(*entries, e.slot) - entries[e.slot]) / e.coef
            lo, hi = model.variables[e.var].lower, model.variables[e.var].upper
            val = np.maximum(val, lo)
            val = np.where(val <= hi + 1e-9 * (1.0 + abs(hi)), val, np.inf)
            X[:, e.var] = val
        finite = np.all(np.isfinite(X), axis=1)
        for ci, cone in enumerate(model.cones):
            if any(e.cone == ci for e in epi.values()):
                continue
            x1, x2, x3 = (_eval(expr, X) for expr in cone.exprs())
            finite &= _min_entry(x1, x2, x3, 0) <= x1 + 1e-12
        if not finite.any():
            continue
        obj = _eval(model.objective, X)
        obj = np.where(finite, obj, np.inf)
        i = int(np.argmin(obj))
        if obj[i] < best:
            best, best_x = float(obj[i]), tuple(float(v) for v in X[i])
    return OracleResult(best, best_x)


def _eval(expr, X: np.ndarray) -> np.ndarray:
    out = np.full(X.shape[0], expr.constant)
    for k, c in expr.terms:
        out = out + c * X[:, k]
    return out


def brute_force_oracle(model: ModelIR) -> float:
    """Optimal objective by enumeration; +inf when no assignment is feasible."""
    return brute_force_solve(model).objective


# ---------------------------------------------------------------------------
# Sparse logistic regression

GOLDEN_TOL = 1e-11


def golden_section(f, a: float, b: float, tol: float = GOLDEN_TOL) -> tuple[float, float]:
    """Minimizer and minimum of a unimodal function on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol * (1.0 + abs(a) + abs(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    cands = [(fc, c), (fd, d), (f(a), a), (f(b), b)]
    fx, x = min(cands)
    return x, fx


def _slr_loss(X: np.ndarray, y: np.ndarray, theta: np.ndarray, lam: float) -> float:
    margin = (1.0 - 2.0 * y) * (X @ theta)
    return float(np.logaddexp(0.0, margin).sum() + lam * np.abs(theta).sum())


@dataclass(frozen=True)
class SlrOracleResult:
    objective: float
    theta: tuple[float, ...]
    support: tuple[int, ...]


def slr_support_oracle(features, labels, lam: float, k: int, big_m: Optional[float] = None,
                       sweeps: int = 500) -> SlrOracleResult:
    """Minimum over supports of size k; each support is solved by coordinate descent."""
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    n, d = X.shape
    big_m = n * math.log(2.0) / lam if big_m is None else big_m
    best = SlrOracleResult(math.inf, (), ())
    for support in itertools.combinations(range(d), k):
        theta = np.zeros(d)
        value = _slr_loss(X, y, theta, lam)
        for _ in range(sweeps):
            before = value
            for j in support:
                def f(v: float, j: int = j) -> float:
                    th = theta.copy()
                    th[j] = v
                    return _slr_loss(X, y, th, lam)
                theta[j], value = golden_section(f, -big_m, big_m)
            if before - value <= 1e-13 * (1.0 + abs(value)):
                break
        if value < best.objective:
            best = SlrOracleResult(value, tuple(float(v) for v in theta), support)
    return best
