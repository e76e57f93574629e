"""Polyhedral solution paths for mixed-integer exponential conic programs.

Every cone ``(e1, e2, e3)`` is replaced by gradient cuts

    e1 / u + (log u - 1) e2 - e3 >= 0,

starting from a coarse geometric grid of ratios ``u`` over the interval the
variable bounds allow for ``e1 / e2``.  Two loops refine the cut set:

* :func:`cutting_plane` solves the MILP to optimality, cuts off the
  incumbent and starts over;
* :func:`branch_and_cut` runs one tree and separates integral node points
  through the lazy-constraint callback.

A violated triple receives two cuts: one at ``u = x1 / x2`` (the most violated
tangent) and one at ``u = exp(x3 / x2)``, the ratio at which the cone boundary
meets the point's ``x3 / x2``.  The second one is exact for cones whose first
entry is the objective variable.

Reformulated models whose cones were replaced by Lorentz rows are handled by
:func:`solve_reformulated`, which outer-approximates each row
``y3 >= |(y1, y2)|`` by tangent half-planes.
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from ..errors import ParameterError, PrecisionWarning
from ..model import AffineExpr, ExpConeConstraint, LinearRow, LorentzRow, ModelIR, Sense, expr_bounds
from ..outer import LinearCut, geometric_grid, separating_cut, tangent_cut
from .bnb import DEFAULT_GAP, MipResult, Status, branch_and_bound
from .lp import FEAS_TOL, LpBackend, LpModel, get_backend

log = logging.getLogger(__name__)

SEED_EPS = 0.1
U_MIN, U_MAX = 1e-8, 1e6
CONE_TOL = 1e-6
# Lorentz rows of a squaring tower compound their residuals level by level,
# so reformulated models are separated more tightly than exact cones.
LORENTZ_TOL = 1e-9
CUT_RESOLUTION = 2.0 * FEAS_TOL  # normalized cut violations the LP cannot resolve
ZERO_TOL = 1e-12
BOUND_CLAMP = 1e6
LORENTZ_SEED_DIRECTIONS = 8
METHODS = ("cutting_plane", "branch_and_cut", "soc_reformulate")


# ---------------------------------------------------------------------------
# Model conversion and cone cuts


def model_to_lp(model: ModelIR, extra_rows: Sequence[LinearRow] = (),
                bounds: Optional[Sequence[tuple[float, float]]] = None) -> LpModel:
    rows = list(model.linear_rows) + list(extra_rows)
    return LpModel.from_rows(model.n_vars, rows, model.objective,
                             bounds if bounds is not None else model.bounds())


def cut_row(cone: ExpConeConstraint, cut: LinearCut) -> LinearRow:
    """The cut as a row over model columns, scaled to unit largest coefficient."""
    a, b, c = cut.coeffs
    expr = cone.e1 * a + cone.e2 * b + cone.e3 * c
    scale = max([abs(v) for _, v in expr.terms] + [abs(expr.constant)])
    return LinearRow(expr * (1.0 / scale) if scale > 0.0 else expr, Sense.GE, 0.0)


def ratio_interval(cone: ExpConeConstraint, bounds: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Enclosure of e1 / e2 over the box, clamped to [U_MIN, U_MAX]."""
    a1, b1 = expr_bounds(cone.e1, bounds)
    a2, b2 = expr_bounds(cone.e2, bounds)
    lo = a1 / b2 if (a1 > 0.0 and math.isfinite(b2) and b2 > 0.0) else U_MIN
    hi = b1 / a2 if (a2 > 0.0 and math.isfinite(b1)) else U_MAX
    lo = min(U_MAX, max(U_MIN, lo))
    hi = min(U_MAX, max(lo, hi))
    return lo, hi


def seed_cuts(model: ModelIR, eps: float = SEED_EPS,
              bounds: Optional[Sequence[tuple[float, float]]] = None) -> list[LinearRow]:
    """Tangent cuts on a geometric ratio grid for every cone."""
    bounds = bounds if bounds is not None else model.bounds()
    rows = []
    for cone in model.cones:
        lo, hi = ratio_interval(cone, bounds)
        rows.extend(cut_row(cone, tangent_cut(u)) for u in geometric_grid(lo, hi, eps))
    return rows


def cone_residual(x1: float, x2: float, x3: float) -> float:
    """How far x3 exceeds x2 log(x1 / x2), in the cone's own units (inf outside the domain)."""
    if x2 > ZERO_TOL and x1 > 0.0:
        return x3 - x2 * (math.log(x1) - math.log(x2))
    if abs(x2) <= ZERO_TOL and x1 >= -ZERO_TOL:
        return max(0.0, x3)
    return math.inf


def max_cone_residual(model: ModelIR, x: Sequence[float]) -> float:
    worst = 0.0
    for cone in model.cones:
        worst = max(worst, cone_residual(*(e.evaluate(x) for e in cone.exprs())))
    return worst


def separate_cones(model: ModelIR, x: Sequence[float], tol: float = CONE_TOL) -> list[LinearRow]:
    """Cuts for every cone whose residual exceeds ``tol``.

    A cut whose normalized violation is within the LP feasibility resolution is
    dropped: the LP already counts it as satisfied, so adding it cannot move
    the point and would only repeat.  This matters when ``e1`` is tiny and the
    cut's ``e3`` coefficient shrinks after normalization.
    """
    rows = []
    for cone in model.cones:
        x1, x2, x3 = (e.evaluate(x) for e in cone.exprs())
        if cone_residual(x1, x2, x3) <= tol:
            continue
        cut = separating_cut(x1, x2, x3, tol=0.0, u_min=U_MIN, u_max=U_MAX)
        if cut is not None:
            rows.append(cut_row(cone, cut))
        if x2 > 0.0:
            r = x3 / x2
            u = math.exp(r) if r < math.log(U_MAX) else U_MAX
            u = max(U_MIN, u)
            if cut is None or abs(u - cut.source) > 1e-12 * u:
                rows.append(cut_row(cone, tangent_cut(u)))
    return [r for r in rows if r.residual(x) > CUT_RESOLUTION]


def polyhedral_model(model: ModelIR, eps: float = SEED_EPS) -> ModelIR:
    """Outer MILP: every cone replaced by its tangent cuts on a geometric ratio grid.

    ``eps`` controls the grid spacing (1 + sqrt(8 eps) between neighbours), so the
    cuts of each cone deviate from it by at most ``eps`` inside its ratio interval.
    """
    from dataclasses import replace

    return replace(model, linear_rows=tuple(model.linear_rows) + tuple(seed_cuts(model, eps)), cones=())


# ---------------------------------------------------------------------------
# Bound propagation


def propagate_bounds(rows: Sequence[LinearRow], bounds: Sequence[tuple[float, float]],
                     integer: Iterable[int] = (), passes: int = 20) -> list[tuple[float, float]]:
    """Feasibility-based bound tightening over linear rows."""
    bnds = [tuple(b) for b in bounds]
    integer = set(integer)
    for _ in range(passes):
        changed = False
        for row in rows:
            terms = row.expr.terms
            rhs = row.rhs - row.expr.constant
            for k, a in terms:
                rest = AffineExpr(tuple(t for t in terms if t[0] != k), 0.0)
                rlo, rhi = expr_bounds(rest, bnds)
                lo, hi = bnds[k]
                # a x_k <= rhs - rest (LE) and a x_k >= rhs - rest (GE).
                if row.sense in (Sense.LE, Sense.EQ) and math.isfinite(rlo):
                    lim = (rhs - rlo) / a
                    if a > 0:
                        hi = min(hi, lim)
                    else:
                        lo = max(lo, lim)
                if row.sense in (Sense.GE, Sense.EQ) and math.isfinite(rhi):
                    lim = (rhs - rhi) / a
                    if a > 0:
                        lo = max(lo, lim)
                    else:
                        hi = min(hi, lim)
                if k in integer:
                    lo, hi = math.ceil(lo - 1e-9), math.floor(hi + 1e-9)
                old_lo, old_hi = bnds[k]
                if lo > hi:
                    continue
                if lo > old_lo + 1e-9 * (1.0 + abs(old_lo)) or hi < old_hi - 1e-9 * (1.0 + abs(old_hi)):
                    bnds[k] = (max(lo, old_lo), min(hi, old_hi))
                    changed = True
        if not changed:
            break
    return bnds


# ---------------------------------------------------------------------------
# Exponential-cone paths


def _no_cone_solve(model: ModelIR, tol_gap: float, time_limit: float, node_limit: int,
                   backend: str | LpBackend) -> MipResult:
    res, _ = branch_and_bound(model_to_lp(model), model.integer_indices(), None, tol_gap,
                              node_limit, time_limit, backend)
    return res


def cutting_plane(model: ModelIR, tol: float = CONE_TOL, round_limit: int = 200,
                  tol_gap: float = DEFAULT_GAP, time_limit: float = math.inf,
                  node_limit: int = 100000, backend: str | LpBackend = "simplex",
                  seed_eps: float = SEED_EPS) -> MipResult:
    """Solve the MILP outer approximation to optimality, cut off the incumbent, repeat.

    ``detail`` lists the root LP value of every round; cuts only accumulate, so
    the sequence is non-decreasing.
    """
    start = time.perf_counter()
    deadline = start + time_limit
    ints = model.integer_indices()
    rows = seed_cuts(model, seed_eps)
    n_seed = len(rows)
    nodes = 0
    root_values = []
    res = None
    for rnd in range(1, round_limit + 1):
        lp = model_to_lp(model, rows)
        root = get_backend(backend)(lp)
        root_values.append(root.objective)
        res, _ = branch_and_bound(lp, ints, None, tol_gap, node_limit, time_limit, backend,
                                  deadline=deadline)
        nodes += res.nodes
        if res.incumbent is None or res.status is not Status.OPTIMAL:
            return _relabel(res, nodes, len(rows) - n_seed, start, root_values)
        cuts = separate_cones(model, res.incumbent, tol)
        log.debug("cutting_plane round %d: obj=%.10g bound=%.10g new cuts=%d",
                  rnd, res.objective, res.bound, len(cuts))
        if not cuts:
            return _relabel(res, nodes, len(rows) - n_seed, start, root_values)
        rows.extend(cuts)
        if time.perf_counter() > deadline:
            return _relabel(res, nodes, len(rows) - n_seed, start, root_values, Status.TIME_LIMIT)
    return _relabel(res, nodes, len(rows) - n_seed, start, root_values, Status.ROUND_LIMIT)


def _relabel(res: MipResult, nodes: int, cuts: int, start: float, roots: Sequence[float],
             status: Optional[Status] = None) -> MipResult:
    detail = "root LP by round: " + ", ".join(f"{v:.12g}" for v in roots)
    return MipResult(status or res.status, res.incumbent, res.objective, res.bound, res.rel_gap,
                     nodes, cuts, time.perf_counter() - start, detail)


def branch_and_cut(model: ModelIR, tol: float = CONE_TOL, tol_gap: float = DEFAULT_GAP,
                   time_limit: float = math.inf, node_limit: int = 100000,
                   backend: str | LpBackend = "simplex", seed_eps: float = SEED_EPS) -> MipResult:
    """One branch-and-bound tree whose integral nodes are separated lazily (cuts are global)."""
    start = time.perf_counter()
    rows = seed_cuts(model, seed_eps)
    res, pool = branch_and_bound(model_to_lp(model, rows), model.integer_indices(),
                                 lambda x: separate_cones(model, x, tol), tol_gap, node_limit,
                                 time_limit, backend)
    return MipResult(res.status, res.incumbent, res.objective, res.bound, res.rel_gap, res.nodes,
                     len(pool), time.perf_counter() - start, res.detail)


# ---------------------------------------------------------------------------
# Reformulated (Lorentz) models


def lorentz_rows_as_linear(lrow: LorentzRow) -> list[LinearRow]:
    """The implied rows y3 >= +-y1 and y3 >= +-y2."""
    return [LinearRow(lrow.y3 - s * y, Sense.GE, 0.0) for y in (lrow.y1, lrow.y2) for s in (1.0, -1.0)]


def lorentz_cut(lrow: LorentzRow, d1: float, d2: float) -> LinearRow:
    """y3 >= (d1 y1 + d2 y2) / |d|, tangent to the cone along direction d."""
    norm = math.hypot(d1, d2)
    return LinearRow(lrow.y3 - lrow.y1 * (d1 / norm) - lrow.y2 * (d2 / norm), Sense.GE, 0.0)


def separate_lorentz(rows: Sequence[LorentzRow], x: Sequence[float], tol: float) -> list[LinearRow]:
    cuts = []
    for lrow in rows:
        y1, y2, y3 = (e.evaluate(x) for e in lrow.exprs())
        if math.hypot(y1, y2) - y3 > max(tol * (1.0 + abs(y3)), CUT_RESOLUTION):
            cuts.append(lorentz_cut(lrow, y1, y2))
    return cuts


def solve_reformulated(model: ModelIR, tol: float = LORENTZ_TOL, tol_gap: float = DEFAULT_GAP,
                       time_limit: float = math.inf, node_limit: int = 100000,
                       backend: str | LpBackend = "simplex") -> MipResult:
    """Solve a model with Lorentz rows (and possibly remaining cones) by lazy tangent cuts."""
    start = time.perf_counter()
    rows = []
    for lrow in model.lorentz_rows:
        rows.extend(lorentz_rows_as_linear(lrow))
        for k in range(LORENTZ_SEED_DIRECTIONS):
            ang = 2.0 * math.pi * k / LORENTZ_SEED_DIRECTIONS + math.pi / LORENTZ_SEED_DIRECTIONS
            rows.append(lorentz_cut(lrow, math.cos(ang), math.sin(ang)))
    ints = model.integer_indices()
    bounds = propagate_bounds(list(model.linear_rows) + rows, model.bounds(), ints)
    bounds = [(max(lo, -BOUND_CLAMP), min(hi, BOUND_CLAMP)) for lo, hi in bounds]
    rows.extend(seed_cuts(model, bounds=bounds))

    def oracle(x: np.ndarray) -> list[LinearRow]:
        return separate_lorentz(model.lorentz_rows, x, tol) + separate_cones(model, x, tol)

    res, pool = branch_and_bound(model_to_lp(model, rows, bounds), ints, oracle, tol_gap,
                                 node_limit, time_limit, backend)
    return MipResult(res.status, res.incumbent, res.objective, res.bound, res.rel_gap, res.nodes,
                     len(pool), time.perf_counter() - start, res.detail)


# ---------------------------------------------------------------------------
# Dispatcher


def _warn_deep_tower(scheme, M: float, tol: float) -> None:
    """Exp-form towers square N times, so a row slack of ``tol`` can grow to about 2^N tol."""
    if scheme.is_log:
        return
    from ..lift import certificate_for

    amplified = 2.0 ** scheme.N * tol
    eps = certificate_for(scheme, M).eps
    if amplified > eps:
        warnings.warn(f"{scheme.kind} tower of depth {scheme.N} can amplify the feasibility tolerance "
                      f"{tol:.1e} up to about {amplified:.1e}, above the certified {eps:.1e}; "
                      "the solved objective may miss the certificate", PrecisionWarning, stacklevel=3)


def solve_miecp(model: ModelIR, method: str = "branch_and_cut", *, scheme=None,
                anchors: Optional[Sequence[float]] = None, export: Optional[str | Path] = None,
                export_format: str = "cbf", export_only: bool = False, tol: Optional[float] = None,
                tol_gap: float = DEFAULT_GAP, time_limit: float = math.inf,
                node_limit: int = 100000, round_limit: int = 200,
                backend: str | LpBackend = "simplex") -> MipResult:
    """Dispatch to ``cutting_plane``, ``branch_and_cut`` or ``soc_reformulate``.

    Models without cones or Lorentz rows go straight to branch-and-bound.  The
    ``soc_reformulate`` path needs a ``scheme``; with ``export_only`` it writes
    the reformulated model to ``export`` and reports status ``exported``.
    """
    method = method.replace("-", "_")
    reform_tol = LORENTZ_TOL if tol is None else tol
    tol = CONE_TOL if tol is None else tol
    if method not in METHODS:
        raise ParameterError(f"unknown method {method!r}; expected one of {METHODS}")
    if method == "soc_reformulate":
        from ..lift import reformulate

        if scheme is None:
            raise ParameterError("soc_reformulate needs a scheme")
        ref = reformulate(model, scheme, anchors)
        _warn_deep_tower(scheme, model.domain_M, reform_tol)
        if export is not None:
            from ..bench.formats import write_model

            write_model(ref, export, export_format)
        if export_only:
            if export is None:
                raise ParameterError("export_only needs an export path")
            return MipResult(Status.EXPORTED, None, math.nan, -math.inf, math.inf, 0, 0, 0.0,
                             f"wrote {export}")
        return solve_reformulated(ref, reform_tol, tol_gap, time_limit, node_limit, backend)
    if not model.cones and not model.lorentz_rows:
        return _no_cone_solve(model, tol_gap, time_limit, node_limit, backend)
    if model.lorentz_rows:
        return solve_reformulated(model, reform_tol, tol_gap, time_limit, node_limit, backend)
    if method == "cutting_plane":
        return cutting_plane(model, tol, round_limit, tol_gap, time_limit, node_limit, backend)
    return branch_and_cut(model, tol, tol_gap, time_limit, node_limit, backend)


__all__ = ["METHODS", "branch_and_cut", "cone_residual", "cut_row", "cutting_plane",
           "lorentz_cut", "max_cone_residual", "model_to_lp", "polyhedral_model", "propagate_bounds", "ratio_interval",
           "seed_cuts", "separate_cones", "separate_lorentz", "solve_miecp",
           "solve_reformulated"]
