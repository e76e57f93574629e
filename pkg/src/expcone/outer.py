"""Polyhedral outer approximation of the exponential cone by gradient cuts.

The tangent of log at u gives, after homogenization, the valid inequality

    x2 (log u - 1) + x1 / u >= x3,

tight on the ray through (u, 1, log u).  A geometric grid of tangent points
with ratio 1 + sqrt(8 eps) keeps the piecewise-linear envelope within eps of
log, because two tangents at points of ratio t leave a gap

    d(t) = -log(log t / (t - 1)) - 1 + log t / (t - 1)  <=  (t - 1)^2 / 8.

The same d(t) is the chord gap of log on [1, t] and drives the counting
lower bound for any extended polyhedral approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError, ParameterError

GOLDEN_TOL = 1e-8
MINIMAX_GRID = 41


@dataclass(frozen=True)
class LinearCut:
    """a x1 + b x2 + c x3 >= 0, the tangent at ratio ``source`` = x1/x2."""

    coeffs: tuple[float, float, float]
    source: float

    def value(self, x1: float, x2: float, x3: float) -> float:
        a, b, c = self.coeffs
        return a * x1 + b * x2 + c * x3

    def violation(self, x1: float, x2: float, x3: float) -> float:
        return max(0.0, -self.value(x1, x2, x3))


def _ceil(value: float) -> int:
    return math.ceil(value - 1e-9)


def tangent_cut(u: float) -> LinearCut:
    if not u > 0.0:
        raise DomainError(f"tangent ratio must be positive, got {u}")
    return LinearCut((1.0 / u, math.log(u) - 1.0, -1.0), float(u))


def gradient_cut(xhat1: float, xhat2: float) -> LinearCut:
    """Gradient inequality of the cone at the ray through (xhat1, xhat2, .)."""
    if not (xhat1 > 0.0 and xhat2 > 0.0):
        raise DomainError(f"gradient_cut needs positive inputs, got ({xhat1}, {xhat2})")
    return tangent_cut(xhat1 / xhat2)


def separating_cut(x1: float, x2: float, x3: float, tol: float = 1e-9,
                   u_min: float = 1e-8, u_max: float = 1e8) -> Optional[LinearCut]:
    """A gradient cut violated by more than ``tol`` at the point, or None.

    Points with x2 > 0 and x1 > 0 use the tangent at u = x1/x2, which is the
    most violated one.  Boundary cases (x2 ~ 0 or x1 <= 0) scan for a tangent
    that separates, since the closure of the cone contains (x1 >= 0, 0, x3 <= 0).
    """
    scale = max(1.0, abs(x1), abs(x2), abs(x3))
    if x2 > 1e-12 * scale and x1 > 0.0:
        u = min(u_max, max(u_min, x1 / x2))
        cut = tangent_cut(u)
        return cut if cut.violation(x1, x2, x3) > tol else None
    if x2 <= 1e-12 * scale:
        if x3 <= tol and x1 >= -tol:
            return None
        u = 2.0 * x1 / x3 if (x1 > 0.0 and x3 > 0.0) else 1.0
        u = min(u_max, max(u_min, u))
        cut = tangent_cut(u)
        return cut if cut.violation(x1, x2, x3) > tol else None
    u = min(1.0, x2)
    while u >= u_min:
        cut = tangent_cut(u)
        if cut.violation(x1, x2, x3) > tol:
            return cut
        u /= 10.0
    return None


def geometric_grid(lo: float, hi: float, eps: float) -> list[float]:
    """Points from lo to hi, consecutive ratio exactly 1 + sqrt(8 eps) except the last cell."""
    if not (0.0 < lo <= hi):
        raise ParameterError(f"grid needs 0 < lo <= hi, got [{lo}, {hi}]")
    if not 0.0 < eps <= 1.0:
        raise ParameterError("eps must lie in (0, 1]")
    if hi / lo <= 1.0 + 1e-15:
        return [float(lo)]
    q = 1.0 + math.sqrt(8.0 * eps)
    count = _ceil(math.log(hi / lo) / math.log(q)) + 1
    pts = [lo * q ** i for i in range(count - 1)] + [float(hi)]
    return pts


def static_grid(M: float, eps: float) -> list[float]:
    """Geometric grid over [1/M, M]."""
    if M < 1.0:
        raise ParameterError("M must be at least 1")
    return geometric_grid(1.0 / M, float(M), eps)


@dataclass(frozen=True)
class OuterPolyhedron:
    """{(x, nu) : log g + (x - g)/g >= nu for every grid point g}."""

    grid: tuple[float, ...]
    cuts: tuple[LinearCut, ...]

    def envelope(self, x: float | np.ndarray) -> float | np.ndarray:
        g = np.asarray(self.grid)
        xs = np.asarray(x, dtype=float)
        vals = np.log(g)[:, None] + (xs.reshape(1, -1) - g[:, None]) / g[:, None]
        out = vals.min(axis=0)
        return out.reshape(xs.shape) if xs.ndim else float(out[0])

    def contains(self, x: float, nu: float, tol: float = 0.0) -> bool:
        return nu <= self.envelope(x) + tol

    def deviation(self, xs: Sequence[float]) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        return self.envelope(xs) - np.log(xs)


def outer_polyhedron(M: float, eps: float) -> OuterPolyhedron:
    grid = static_grid(M, eps)
    return OuterPolyhedron(tuple(grid), tuple(tangent_cut(g) for g in grid))


def chord_gap(t: float) -> float:
    """max over x in [1, t] of log x minus the chord through (1, 0), (t, log t)."""
    if t < 1.0:
        raise DomainError(f"t must be >= 1, got {t}")
    if t - 1.0 < 1e-4:
        # Series (t-1)^2/8 - (t-1)^3/8 + ... avoids cancellation near 1.
        h = t - 1.0
        return h * h / 8.0 - h ** 3 / 8.0 + 43.0 * h ** 4 / 384.0
    s = math.log(t) / (t - 1.0)
    return -math.log(s) - 1.0 + s


def tangent_gap(t: float) -> float:
    """Largest nu-gap between log and two tangents at points of ratio t."""
    return chord_gap(t)


def _golden_max(f, a: float, b: float, tol: float = GOLDEN_TOL) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return max(fc, fd, f(a), f(b))


def _chord_deviation(t: float, d1: float, d2: float) -> float:
    slope = (math.log(t) + d2 - d1) / (t - 1.0)
    f = lambda x: math.log(x) - slope * (x - 1.0) - d1  # noqa: E731
    # f is concave: its minimum over [1, t] sits at an endpoint.
    return max(_golden_max(f, 1.0, t), -f(1.0), -f(t))


def dH_numeric(t: float, eps: float, grid: int = MINIMAX_GRID) -> float:
    """min over (d1, d2) in [-eps, eps]^2 of max over [1, t] of the chord deviation."""
    if t <= 1.0:
        return 0.0
    ds = np.linspace(-eps, eps, grid)
    best, arg = math.inf, (0.0, 0.0)
    for d1 in ds:
        for d2 in ds:
            val = _chord_deviation(t, float(d1), float(d2))
            if val < best:
                best, arg = val, (float(d1), float(d2))
    # The objective is convex in (d1, d2); polish the grid optimum.
    res = minimize(lambda d: _chord_deviation(t, float(d[0]), float(d[1])), np.array(arg),
                   method="Nelder-Mead", bounds=[(-eps, eps), (-eps, eps)],
                   options={"xatol": 1e-10, "fatol": 1e-12})
    return min(best, float(res.fun))


def dH_lower(t: float, eps: float) -> float:
    """Closed-form lower bound chord_gap(t) / 2 on the Hausdorff-type distance."""
    if t < 1.0:
        raise DomainError(f"t must be >= 1, got {t}")
    if not 0.0 < eps <= 1.0:
        raise ParameterError("eps must lie in (0, 1]")
    return 0.5 * chord_gap(t)


@dataclass(frozen=True)
class LowerBoundCounts:
    q_poly: int
    n_outer: int
    q_soc_heuristic: float


def lower_bound_counts(M: float, eps: float) -> LowerBoundCounts:
    """Counting quantities behind the polyhedral lower bound and the outer grid.

    ``q_soc_heuristic`` divides q_poly by max(1, log(1/eps)); it is a
    heuristic reading of the SOC lower bound, not a proven count.
    """
    if not 0.0 < eps <= 1.0:
        raise ParameterError("eps must lie in (0, 1]")
    if not M > 1.0:
        raise ParameterError("M must exceed 1")
    ratio = 2.0 * math.log(M) / math.log(1.0 + math.sqrt(1e4 * eps))
    q_poly = max(0, _ceil(math.log2(ratio))) if ratio > 0 else 0
    n_outer = max(0, _ceil(2.0 * math.log(M) / math.log(1.0 + math.sqrt(8.0 * eps))))
    return LowerBoundCounts(q_poly, n_outer, q_poly / max(1.0, math.log(1.0 / eps)))
