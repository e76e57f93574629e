"""Perspective lifting of scalar blocks to exponential-cone approximations.

A hypograph block for log over ``(x, nu)`` becomes a cone block over
``(x1, x2, x3)`` by reading ``x = x1/x2`` and ``nu = x3/x2`` and scaling every
auxiliary by ``x2``; an epigraph block for exp over ``(x, v)`` uses
``x = x3/x2`` and ``v = x1/x2``.  In both cases constants pick up a factor
``x2``, so every lifted row is positively homogeneous.

This module also hosts :func:`reformulate` (model level), the empirical
sandwich check :func:`verify_sandwich` and the Best Scale anchor procedure.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .blocks import BlockBuilder, SocBlock
from .errors import ParameterError, ProcedureError
from .exp_schemes import (EXP_KINDS, ExpSchemeSpec, exp_approx_value, levels_needed_exp,
                          limit_error_bound, soc_block_exp, taylor_error_bound)
from .log_schemes import (LOG_KINDS, GenFnSpec, log_approx_value, log_error_bound,
                          points_needed_log, soc_block_log)
from .model import AffineExpr, LinearRow, LorentzRow, ModelBuilder, ModelIR
from .quadrature import gauss_legendre

log = logging.getLogger(__name__)

SCHEME_KINDS = LOG_KINDS + EXP_KINDS


@dataclass(frozen=True)
class SchemeSpec:
    """Any approximation scheme plus its parameters.

    ``anchor`` is x_hat for phi3 and the shift x_hat3/x_hat2 for shifted exp
    schemes; ``delta`` is the radius of the window around the anchor over which
    accuracy is certified (relative for phi3, absolute for shifts).
    """

    kind: str
    N: int
    a: Optional[float] = None
    s: Optional[int] = None
    anchor: Optional[float] = None
    delta: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in SCHEME_KINDS:
            raise ParameterError(f"unknown scheme {self.kind!r}")
        # Constructing the component specs validates the parameters.
        self.component()

    @property
    def is_log(self) -> bool:
        return self.kind in LOG_KINDS

    def component(self) -> GenFnSpec | ExpSchemeSpec:
        if self.kind == "phi1":
            return GenFnSpec.phi1(1.0 if self.a is None else self.a)
        if self.kind == "phi2":
            return GenFnSpec.phi2(self.N if self.s is None else self.s)
        if self.kind == "phi3":
            return GenFnSpec.phi3(1.0 if self.anchor is None else self.anchor)
        s = (1 if self.s is None else self.s) if self.kind.startswith("taylor") else None
        anchor = (0.0 if self.anchor is None else self.anchor) if self.kind.endswith("shift") else None
        return ExpSchemeSpec(self.kind, self.N, s=s, anchor=anchor)

    def with_anchor(self, anchor: float) -> "SchemeSpec":
        return replace(self, anchor=float(anchor))

    def value(self, u: float) -> float:
        """Scalar approximation of log u (log form) or exp u (exp form)."""
        comp = self.component()
        if self.is_log:
            return log_approx_value(comp, gauss_legendre(self.N), u)
        return exp_approx_value(comp, u)

    def log_deviation(self, u: float) -> float:
        """Deviation in alpha units: g(u) - log u, or log h(u) - u."""
        comp = self.component()
        if self.is_log:
            return log_approx_value(comp, gauss_legendre(self.N), u) - math.log(u)
        y = math.ldexp(u - comp.shift, -comp.N)
        # t = (base of the 2^N-th power) - 1, formed without adding the 1 so
        # that log1p(t) - y is free of cancellation.
        if comp.kind.startswith("taylor"):
            t = 0.0
            for i in range(2 * comp.s, 0, -1):
                t = y / i * (1.0 + t)
        else:
            t = y
        if t <= -1.0:
            return -math.inf
        return math.ldexp(math.log1p(t) - y, comp.N)


@dataclass(frozen=True)
class Certificate:
    eps: float
    domain: tuple[float, float]
    one_sided: bool
    note: str = ""


@dataclass(frozen=True)
class ConeApproxBlock:
    base: SocBlock
    scheme: SchemeSpec
    certificate: Certificate


@dataclass(frozen=True)
class AccuracyReport:
    eps_plus: float
    eps_minus: float
    grid_size: int
    worst_point: float
    domain: tuple[float, float]
    claimed_eps: float
    one_sided: bool
    note: str = ""

    @property
    def eps(self) -> float:
        return max(self.eps_plus, self.eps_minus)

    CSV_HEADER = "eps_plus,eps_minus,grid_size,worst_point,domain_lo,domain_hi,claimed_eps,one_sided"

    def csv_row(self) -> str:
        return ",".join(repr(v) for v in (self.eps_plus, self.eps_minus, self.grid_size, self.worst_point,
                                          self.domain[0], self.domain[1], self.claimed_eps)) + \
            f",{int(self.one_sided)}"


# ---------------------------------------------------------------------------
# Certified domains


def exp_radius(M: float) -> float:
    return 2.0 * M * math.log(M)


def certified_domain(scheme: SchemeSpec, M: float) -> tuple[tuple[float, float], str]:
    if scheme.kind == "phi3" and scheme.delta is not None:
        xh = scheme.anchor if scheme.anchor is not None else 1.0
        return (xh * (1.0 - scheme.delta), xh * (1.0 + scheme.delta)), "anchor window"
    if scheme.is_log:
        return (1.0 / (M * M), M * M), "ratio domain [1/M^2, M^2]"
    if scheme.kind.endswith("shift") and scheme.delta is not None:
        xh = scheme.anchor if scheme.anchor is not None else 0.0
        return (xh - scheme.delta, xh + scheme.delta), "anchor window"
    L = exp_radius(M)
    return (-L, L), "ratio domain [-2M log M, 2M log M]"


def certificate_for(scheme: SchemeSpec, M: float) -> Certificate:
    """Closed-form accuracy claimed for ``scheme`` over its certified domain."""
    domain, note = certified_domain(scheme, M)
    one_sided = scheme.kind in ("limit", "limit_shift")
    try:
        if scheme.kind == "phi1":
            eps = log_error_bound(scheme.component(), M * M, scheme.N)
            note += "; L recomputed with M <- M^2"
        elif scheme.kind == "phi2":
            comp = scheme.component()
            if comp.s != scheme.N:
                raise ParameterError("closed form needs s = N")
            eps = log_error_bound("phi2", M * M, scheme.N)
            note += "; L recomputed with M <- M^2"
        elif scheme.kind == "phi3":
            if scheme.delta is None:
                raise ParameterError("phi3 certificate needs delta")
            eps = log_error_bound("phi3", M, scheme.N, delta=scheme.delta)
        else:
            radius = max(abs(domain[0] - scheme.component().shift), abs(domain[1] - scheme.component().shift))
            if scheme.kind.startswith("limit"):
                eps = limit_error_bound(radius, scheme.N) if math.ldexp(1.0, scheme.N) >= 2 * radius else math.inf
            else:
                eps = taylor_error_bound(radius, scheme.N, scheme.component().s) \
                    if math.ldexp(1.0, scheme.N) >= radius else math.inf
    except ParameterError as exc:
        eps, note = math.inf, f"{note}; no closed form ({exc})"
    return Certificate(eps, domain, one_sided, note)


def certified_scheme(kind: str, M: float, eps: float, anchor: Optional[float] = None,
                     delta: Optional[float] = None, a: float = 1.0, s: int = 1) -> SchemeSpec:
    """Scheme of the given kind with the smallest N whose certificate is <= eps."""
    if kind == "phi1":
        return SchemeSpec("phi1", points_needed_log(GenFnSpec.phi1(a), M * M, eps), a=a)
    if kind == "phi2":
        N = points_needed_log("phi2", M * M, eps)
        return SchemeSpec("phi2", N, s=N)
    if kind == "phi3":
        delta = 0.5 if delta is None else delta
        anchor = 1.0 if anchor is None else anchor
        return SchemeSpec("phi3", points_needed_log("phi3", M, eps, delta=delta), anchor=anchor, delta=delta)
    if kind in ("limit", "taylor"):
        N = levels_needed_exp(kind, exp_radius(M), eps, s)
        return SchemeSpec(kind, N, s=s if kind == "taylor" else None)
    if kind in ("limit_shift", "taylor_shift"):
        delta = 1.0 if delta is None else delta
        anchor = 0.0 if anchor is None else anchor
        N = levels_needed_exp(kind, delta, eps, s)
        return SchemeSpec(kind, N, s=s if kind == "taylor_shift" else None, anchor=anchor, delta=delta)
    raise ParameterError(f"unknown scheme {kind!r}")


# ---------------------------------------------------------------------------
# Lifting


def base_block(scheme: SchemeSpec) -> SocBlock:
    comp = scheme.component()
    if scheme.is_log:
        return soc_block_log(comp, gauss_legendre(scheme.N))
    return soc_block_exp(comp)


def lift(block: SocBlock, scheme: SchemeSpec, M: float) -> ConeApproxBlock:
    """Homogenize a scalar block into a block over ``(x1, x2, x3)``."""
    form = block.info().get("form")
    if block.interface == ("x", "nu") and scheme.is_log and form == "log":
        ratio_of = {0: 0, 1: 2}      # x -> x1, nu -> x3
    elif block.interface == ("x", "v") and not scheme.is_log and form == "exp":
        ratio_of = {0: 2, 1: 0}      # x -> x3, v -> x1
    else:
        raise ParameterError(f"block with interface {block.interface} cannot be lifted under {scheme.kind}")
    n_if = len(block.interface)
    b = BlockBuilder(("x1", "x2", "x3"))
    x2 = b.iface("x2")
    mapping = {k: b.iface(("x1", "x2", "x3")[j]) for k, j in ratio_of.items()}
    for i, a in enumerate(block.aux_vars):
        mapping[n_if + i] = b.aux(a.name, a.lower, a.upper)
        if not (a.lower in (0.0, -math.inf) and a.upper in (0.0, math.inf)):
            raise ParameterError(f"aux {a.name} has non-sign bounds; lifting would break homogeneity")

    def hom(e: AffineExpr) -> AffineExpr:
        return AffineExpr.build(e.terms, 0.0).substitute(mapping) + x2 * e.constant

    for row in block.linear_rows:
        b.row(hom(row.expr - row.rhs), row.sense)
    for lrow in block.lorentz_rows:
        b.lorentz(*(hom(e) for e in lrow.exprs()))
    for name, e in block.named_exprs:
        b.name(name, hom(e))
    lifted = b.build(**dict(block.meta, form="cone"))
    return ConeApproxBlock(lifted, scheme, certificate_for(scheme, M))


def lifted_block(scheme: SchemeSpec, M: float) -> ConeApproxBlock:
    return lift(base_block(scheme), scheme, M)


def reformulate(model: ModelIR, scheme: SchemeSpec,
                anchors: Optional[Sequence[float]] = None) -> ModelIR:
    """Replace every exponential cone by a lifted SOC block.

    ``anchors`` optionally gives one anchor per cone (phi3 and shifted schemes).
    """
    if anchors is not None and len(anchors) != len(model.cones):
        raise ParameterError("need exactly one anchor per cone")
    mb = ModelBuilder.from_model(model)
    mb._cones = []
    cache: dict[float, ConeApproxBlock] = {}
    for i, cone in enumerate(model.cones):
        sch = scheme if anchors is None else scheme.with_anchor(anchors[i])
        key = sch.anchor if sch.anchor is not None else 0.0
        if key not in cache:
            cache[key] = lifted_block(sch, model.domain_M)
        blk = cache[key].base
        mapping = {0: cone.e1, 1: cone.e2, 2: cone.e3}
        for j, a in enumerate(blk.aux_vars):
            mapping[3 + j] = AffineExpr.var(mb.add_var(a.lower, a.upper))
        for row in blk.linear_rows:
            expr = row.expr.substitute(mapping)
            mb.add_row(AffineExpr(expr.terms, 0.0), row.sense, row.rhs - expr.constant)
        for lrow in blk.lorentz_rows:
            mb.add_lorentz(*(e.substitute(mapping) for e in lrow.exprs()))
    return mb.build()


# ---------------------------------------------------------------------------
# Empirical sandwich check


def verify_sandwich(scheme: SchemeSpec, M: float, grid: int = 2000,
                    domain: Optional[tuple[float, float]] = None) -> AccuracyReport:
    """Grid maxima of the directed deviations of ``scheme`` from the exact cone.

    The ratio u is swept log-uniformly (log form) or uniformly (exp form) over
    the certified domain unless ``domain`` overrides it.  With d(u) the
    alpha-unit deviation (``SchemeSpec.log_deviation``), eps_plus is
    max(0, max d) and eps_minus is max(0, max -d).
    """
    if grid < 100:
        raise ParameterError("grid must have at least 100 points")
    cert = certificate_for(scheme, M)
    lo, hi = domain if domain is not None else cert.domain
    if scheme.is_log:
        us = np.geomspace(lo, hi, grid)
    else:
        us = np.linspace(lo, hi, grid)
    devs = np.array([scheme.log_deviation(float(u)) for u in us])
    i_plus, i_minus = int(np.argmax(devs)), int(np.argmin(devs))
    eps_plus = max(0.0, float(devs[i_plus]))
    eps_minus = max(0.0, float(-devs[i_minus]))
    worst = float(us[i_plus] if eps_plus >= eps_minus else us[i_minus])
    return AccuracyReport(eps_plus, eps_minus, grid, worst, (float(lo), float(hi)),
                          cert.eps, cert.one_sided, cert.note)


# ---------------------------------------------------------------------------
# Best Scale


@dataclass(frozen=True)
class BestScaleResult:
    anchors: tuple[float, ...]
    pilot_objective: float
    pilot_status: str
    elapsed: float


DEFAULT_PILOT = SchemeSpec("phi3", 1, anchor=2.0 ** -4)


def cone_ratios(model: ModelIR, x: Sequence[float], log_form: bool = True) -> list[float]:
    """Per-cone x1/x2 (log form) or x3/x2 (exp form) at an assignment."""
    out = []
    for cone in model.cones:
        x1, x2, x3 = (e.evaluate(x) for e in cone.exprs())
        if x2 <= 0.0:
            out.append(math.nan)
        else:
            out.append((x1 if log_form else x3) / x2)
    return out


def _polish(model: ModelIR, x: Sequence[float], time_limit: float) -> Optional[list[float]]:
    """Fix the integer columns at ``x`` and solve the continuous rest on the exact cones."""
    from .solve.bnb import Status
    from .solve.driver import branch_and_cut

    fixed = list(model.variables)
    for j in model.integer_indices():
        v = float(round(x[j]))
        fixed[j] = replace(fixed[j], lower=v, upper=v)
    res = branch_and_cut(replace(model, variables=tuple(fixed)), time_limit=time_limit)
    if res.incumbent is None or res.status is not Status.OPTIMAL:
        return None
    return list(res.incumbent)


def best_scale(model: ModelIR, pilot: SchemeSpec = DEFAULT_PILOT, time_limit: float = 2.0,
               log_form: Optional[bool] = None, polish: bool = True) -> BestScaleResult:
    """Harvest per-cone anchors from a quick solve of a cheap pilot reformulation.

    The pilot's integer assignment is polished into a feasible point of the
    original model (integers fixed, continuous columns optimized on the exact
    cones), and the anchors are the cone ratios at that point.  Without
    ``polish``, or when polishing fails, the pilot point itself is used.
    Anchors are clamped to [1/M^2, M^2] in log form and to
    [-2M log M, 2M log M] in exp form.
    """
    from .solve.driver import solve_reformulated

    if not model.cones:
        raise ProcedureError("best_scale needs at least one cone")
    log_form = pilot.is_log if log_form is None else log_form
    start = time.perf_counter()
    result = solve_reformulated(reformulate(model, pilot), time_limit=time_limit)
    if result.incumbent is None:
        raise ProcedureError(f"pilot solve found no incumbent (status {result.status})")
    x = list(result.incumbent)[: model.n_vars]
    if polish:
        x = _polish(model, x, time_limit) or x
    M = model.domain_M
    ratios = cone_ratios(model, x, log_form)
    if log_form:
        lo, hi, fallback = 1.0 / (M * M), M * M, pilot.anchor or 1.0
    else:
        L = exp_radius(M)
        lo, hi, fallback = -L, L, pilot.anchor or 0.0
    anchors = tuple(fallback if not math.isfinite(r) else min(hi, max(lo, r)) for r in ratios)
    elapsed = time.perf_counter() - start
    log.info("best_scale: anchors %s from pilot objective %.6g", anchors, result.objective)
    return BestScaleResult(anchors, result.objective, result.status.value, elapsed)
